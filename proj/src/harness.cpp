#include "dppal/harness.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "dppal/errors.hpp"
#include "dppal/mode.hpp"
#include "json.hpp"

namespace dppal {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

// splitmix64 finaliser; turns (seed, stream) into well-spread child seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Runs fn(i) for i in [0, n) on `threads` workers; the first exception is
// rethrown after every worker has stopped.
template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (int w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) ==
        allowed.end()) {
      throw ConfigError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void read_key(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  strategy.validate();
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (budget < 1) throw ConfigError("budget must be >= 1");
  if (replicates < 1) throw ConfigError("replicates must be >= 1");
  for (int h : classifier.hidden) {
    if (h < 1) throw ConfigError("hidden layer sizes must be positive");
  }
  if (classifier.train.epochs < 0) throw ConfigError("epochs must be >= 0");
  if (classifier.train.members < 1) throw ConfigError("members must be >= 1");
  if (!(classifier.train.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (dataset.kind == DatasetSpec::Kind::sine && (dataset.sine.n < 1 || dataset.test_n < 1)) {
    throw ConfigError("sine dataset sizes must be >= 1");
  }
  if (dataset.kind == DatasetSpec::Kind::csv && dataset.path.empty()) {
    throw ConfigError("csv dataset needs a path");
  }
}

double default_alpha(StrategyKind kind) {
  return kind == StrategyKind::passive_dpp || kind == StrategyKind::passive_dpp_mode ? 5.0 : 4.0;
}

ExperimentData prepare_data(const DatasetSpec& spec) {
  ExperimentData data;
  if (spec.kind == DatasetSpec::Kind::sine) {
    data.pool = generate_sine_dataset(spec.sine);
    SyntheticSineSpec test_spec = spec.sine;
    test_spec.n = spec.test_n;
    test_spec.seed = mix_seed(spec.sine.seed, 0x7e57);
    data.test = generate_sine_dataset(test_spec);
    data.pool_rows.resize(data.pool.size());
    data.test_rows.resize(data.test.size());
    std::iota(data.pool_rows.begin(), data.pool_rows.end(), 0);
    std::iota(data.test_rows.begin(), data.test_rows.end(), static_cast<int>(data.pool.size()));
    return data;
  }
  Dataset full = load_csv(spec.path, spec.label_column, spec.normalize);
  if (!full.has_labels()) throw ConfigError("csv dataset needs a label column");
  full.validate();
  // Tag rows with their file position so the halves can be traced back.
  Dataset tagged = full;
  tagged.features.conservativeResize(Eigen::NoChange, full.dim() + 1);
  for (Eigen::Index r = 0; r < full.size(); ++r) tagged.features(r, full.dim()) = static_cast<double>(r);
  auto [pool, test] = split_halves(tagged, spec.split_seed);
  for (Eigen::Index r = 0; r < pool.size(); ++r) data.pool_rows.push_back(static_cast<int>(pool.features(r, full.dim())));
  for (Eigen::Index r = 0; r < test.size(); ++r) data.test_rows.push_back(static_cast<int>(test.features(r, full.dim())));
  pool.features.conservativeResize(Eigen::NoChange, full.dim());
  test.features.conservativeResize(Eigen::NoChange, full.dim());
  data.pool = std::move(pool);
  data.test = std::move(test);
  return data;
}

bool ExperimentRecord::same_outcome(const ExperimentRecord& other) const {
  if (strategy != other.strategy || replicate != other.replicate || seed != other.seed ||
      final_accuracy != other.final_accuracy || iterations.size() != other.iterations.size()) {
    return false;
  }
  for (std::size_t i = 0; i < iterations.size(); ++i) {
    const auto& a = iterations[i];
    const auto& b = other.iterations[i];
    if (a.batch != b.batch || a.labeled != b.labeled || a.accuracy != b.accuracy) return false;
  }
  return true;
}

ExperimentRecord run_replicate(const ExperimentConfig& cfg, const ExperimentData& data, int replicate) {
  const Dataset& pool = data.pool;
  const Dataset& test = data.test;
  const int classes = std::max({pool.classes, test.classes, 2});
  MlpSpec net{{static_cast<int>(pool.dim())}};
  net.layer_sizes.insert(net.layer_sizes.end(), cfg.classifier.hidden.begin(), cfg.classifier.hidden.end());
  net.layer_sizes.push_back(classes);

  StrategyConfig strategy = cfg.strategy;
  if (strategy.sigma <= 0.0) {
    strategy.sigma = default_sigma(std::max(cfg.batch_size, 2), static_cast<int>(pool.dim()));
  }

  const std::unordered_set<int> test_rows(data.test_rows.begin(), data.test_rows.end());

  ExperimentRecord rec;
  rec.strategy = to_string(strategy.kind);
  rec.replicate = replicate;
  rec.seed = cfg.base_seed + static_cast<std::uint64_t>(replicate);

  PoolState state(pool.features, cfg.budget);
  std::optional<Ensemble> model;
  const long rounds = (cfg.budget + cfg.batch_size - 1) / cfg.batch_size;
  for (long t = 0; t < rounds && state.remaining_budget() > 0; ++t) {
    IterationRecord it;
    const int take = static_cast<int>(std::min<long>(cfg.batch_size, state.remaining_budget()));

    auto t0 = Clock::now();
    Vector q;
    if (model && uses_uncertainty(strategy.kind)) q = uncertainty(*model, pool.features);
    const Subset batch = select_batch(state, take, strategy, q, mix_seed(rec.seed, 2 * t));
    it.selection_seconds = seconds_since(t0);

    state.add_batch(batch);
    for (int i : batch) {
      if (test_rows.contains(data.pool_rows[i])) throw Error("labeled pool row is in the test set");
      state.reveal(i, pool.labels[i]);
    }
    it.batch = batch.vector();
    it.labeled = static_cast<long>(state.labeled().size());

    t0 = Clock::now();
    std::vector<int> idx = state.labeled();
    const Matrix x = pool.rows(idx).features;
    model.emplace(train_ensemble(net, x, state.labels(), cfg.classifier.train, mix_seed(rec.seed, 2 * t + 1)));
    it.accuracy = accuracy(predict_labels(*model, test.features), test.labels);
    it.training_seconds = seconds_since(t0);
    rec.iterations.push_back(std::move(it));
  }
  rec.final_accuracy = rec.iterations.empty() ? 0.0 : rec.iterations.back().accuracy;
  return rec;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg, const ExperimentData& data) {
  cfg.validate();
  if (data.pool.size() < cfg.budget) {
    throw ConfigError("pool has " + std::to_string(data.pool.size()) + " rows, fewer than the budget " +
                      std::to_string(cfg.budget));
  }
  if (!data.pool.has_labels() || !data.test.has_labels()) throw ConfigError("datasets need labels");
  std::vector<ExperimentRecord> out(cfg.replicates);
  parallel_for(cfg.replicates, cfg.threads, [&](int r) { out[r] = run_replicate(cfg, data, r); });
  return out;
}

std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_experiment(cfg, prepare_data(cfg.dataset));
}

SampleStats sample_stats(const std::vector<double>& x) {
  if (x.empty()) throw InputError("statistics of an empty sample");
  const double n = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, x.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0, x.size()};
}

WelchResult welch_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw InputError("Welch test needs at least two values per sample");
  const SampleStats sa = sample_stats(a);
  const SampleStats sb = sample_stats(b);
  const double va = sa.stddev * sa.stddev / static_cast<double>(sa.n);
  const double vb = sb.stddev * sb.stddev / static_cast<double>(sb.n);
  if (!(va + vb > 0.0)) throw InputError("Welch test needs nonzero variance in at least one sample");
  const double t = (sa.mean - sb.mean) / std::sqrt(va + vb);
  const double dof = (va + vb) * (va + vb) /
                     (va * va / static_cast<double>(sa.n - 1) + vb * vb / static_cast<double>(sb.n - 1));
  const boost::math::students_t dist(dof);
  const double p = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return {t, p, dof};
}

std::vector<double> final_accuracies(const std::vector<ExperimentRecord>& records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.final_accuracy);
  return out;
}

ComparisonSummary summarize(const std::vector<ExperimentRecord>& records) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> by_strategy;
  for (const auto& r : records) {
    if (!by_strategy.contains(r.strategy)) order.push_back(r.strategy);
    by_strategy[r.strategy].push_back(r.final_accuracy);
  }
  ComparisonSummary s;
  for (const auto& name : order) s.strategies.push_back({name, sample_stats(by_strategy[name])});
  for (std::size_t i = 0; i < order.size(); ++i) {
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const auto& a = by_strategy[order[i]];
      const auto& b = by_strategy[order[j]];
      if (a.size() < 2 || b.size() < 2) continue;
      try {
        s.pairs.push_back({order[i], order[j], welch_t_test(a, b)});
      } catch (const InputError&) {
        // Both samples constant: no test to report.
      }
    }
  }
  return s;
}

void write_summary_table(const ComparisonSummary& s, std::ostream& out) {
  out << std::left << std::setw(20) << "strategy" << std::right << std::setw(6) << "n" << std::setw(10)
      << "mean" << std::setw(10) << "std" << '\n';
  out << std::fixed << std::setprecision(4);
  for (const auto& row : s.strategies) {
    out << std::left << std::setw(20) << row.strategy << std::right << std::setw(6) << row.accuracy.n
        << std::setw(10) << row.accuracy.mean << std::setw(10) << row.accuracy.stddev << '\n';
  }
  if (!s.pairs.empty()) out << "\nWelch t-tests (final accuracy)\n";
  for (const auto& p : s.pairs) {
    out << "  " << p.a << " vs " << p.b << ": t = " << std::setprecision(3) << p.test.t
        << ", dof = " << std::setprecision(1) << p.test.dof << ", p = " << std::scientific
        << std::setprecision(3) << p.test.p << std::fixed << '\n';
  }
  out << std::defaultfloat;
}

void write_curve_csv(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  out << "strategy,replicate,labeled,accuracy\n";
  out << std::setprecision(17);
  for (const auto& r : records) {
    for (const auto& it : r.iterations) {
      out << r.strategy << ',' << r.replicate << ',' << it.labeled << ',' << it.accuracy << '\n';
    }
  }
  out << std::defaultfloat << std::setprecision(6);
}

std::vector<double> default_gamma_grid() { return {0, 1, 2, 3, 4, 5, 6, 7}; }

TuneResult tune_gamma(const ExperimentConfig& base, const std::vector<double>& grid, int replicates,
                      std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("gamma grid is empty");
  const ExperimentData real = prepare_data(base.dataset);

  // Fake labels on the pool only; the real labels are never looked at.
  Dataset fake = real.pool;
  if (base.dataset.kind == DatasetSpec::Kind::sine && fake.dim() == 2) {
    fake.labels = fake_labels_sine(fake.features);
    fake.classes = 2;
  } else {
    fake.labels = fake_labels_centroid(fake.features, std::max(real.pool.classes, 1), seed);
    fake.classes = std::max(real.pool.classes, 1);
  }
  fake.label_names.clear();
  ExperimentData data;
  auto [train, test] = split_halves(fake, seed);
  data.pool = std::move(train);
  data.test = std::move(test);
  // split_halves keeps rows disjoint; number them apart for the structural check.
  data.pool_rows.resize(data.pool.size());
  data.test_rows.resize(data.test.size());
  std::iota(data.pool_rows.begin(), data.pool_rows.end(), 0);
  std::iota(data.test_rows.begin(), data.test_rows.end(), static_cast<int>(data.pool.size()));

  TuneResult result{grid.front(), {}};
  double best_mean = -1.0;
  for (double gamma : grid) {
    ExperimentConfig cfg = base;
    cfg.strategy.gamma = gamma;
    cfg.replicates = replicates;
    cfg.base_seed = seed;
    const SampleStats stats = sample_stats(final_accuracies(run_experiment(cfg, data)));
    result.grid.push_back({gamma, stats});
    if (stats.mean > best_mean || (stats.mean == best_mean && gamma < result.best_gamma)) {
      best_mean = stats.mean;
      result.best_gamma = gamma;
    }
  }
  return result;
}

ModeCompareSummary mode_compare(int n_instances, int point_count, double sigma, int k,
                                std::uint64_t seed, int threads) {
  if (n_instances < 1 || point_count < 1 || k < 1 || !(sigma > 0.0)) {
    throw ParameterError("mode-compare parameters must be positive");
  }
  if (k > point_count) throw ParameterError("k exceeds the number of points");
  ModeCompareSummary s;
  s.instances.resize(n_instances);
  parallel_for(n_instances, threads, [&](int i) {
    std::mt19937_64 rng(seed + static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Matrix points(point_count, 2);
    for (Eigen::Index r = 0; r < points.size(); ++r) points.data()[r] = unif(rng);
    const Matrix l = gaussian_similarity(points, sigma).entries;
    McrConfig mcr;
    mcr.smd.seed = mix_seed(seed, static_cast<std::uint64_t>(i));
    s.instances[i] = {greedy_mode(l, k).log_det, mcr_mode(l, k, mcr).log_det};
  });
  int better = 0, at_least = 0;
  for (const auto& inst : s.instances) {
    const double tol = 1e-9 * std::max(1.0, std::abs(inst.greedy_log_det));
    better += inst.mcr_log_det > inst.greedy_log_det + tol;
    at_least += inst.mcr_log_det >= inst.greedy_log_det - tol;
  }
  s.mcr_strictly_better = static_cast<double>(better) / n_instances;
  s.mcr_better_or_equal = static_cast<double>(at_least) / n_instances;
  return s;
}

std::string record_to_json(const ExperimentRecord& r) {
  json j;
  j["strategy"] = r.strategy;
  j["replicate"] = r.replicate;
  j["seed"] = r.seed;
  j["final_accuracy"] = r.final_accuracy;
  json its = json::array();
  for (const auto& it : r.iterations) {
    its.push_back({{"batch", it.batch},
                   {"labeled", it.labeled},
                   {"accuracy", it.accuracy},
                   {"selection_seconds", it.selection_seconds},
                   {"training_seconds", it.training_seconds}});
  }
  j["iterations"] = std::move(its);
  return j.dump();
}

ExperimentRecord record_from_json(const std::string& line) {
  try {
    const json j = json::parse(line);
    ExperimentRecord r;
    r.strategy = j.at("strategy").get<std::string>();
    r.replicate = j.at("replicate").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.final_accuracy = j.at("final_accuracy").get<double>();
    for (const auto& it : j.at("iterations")) {
      IterationRecord rec;
      rec.batch = it.at("batch").get<std::vector<int>>();
      rec.labeled = it.at("labeled").get<long>();
      rec.accuracy = it.at("accuracy").get<double>();
      rec.selection_seconds = it.at("selection_seconds").get<double>();
      rec.training_seconds = it.at("training_seconds").get<double>();
      r.iterations.push_back(std::move(rec));
    }
    return r;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad record: ") + e.what());
  }
}

void write_records(const std::vector<ExperimentRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << record_to_json(r) << '\n';
}

std::vector<ExperimentRecord> read_records(std::istream& in) {
  std::vector<ExperimentRecord> out;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const ParseError& e) {
      throw ParseError("records line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

ExperimentConfig config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(root, {"dataset", "strategy", "budget", "batch_size", "replicates", "base_seed",
                    "classifier", "output", "threads"},
             "config");
  ExperimentConfig cfg;
  read_key(root, "budget", cfg.budget);
  read_key(root, "batch_size", cfg.batch_size);
  read_key(root, "replicates", cfg.replicates);
  read_key(root, "base_seed", cfg.base_seed);
  read_key(root, "output", cfg.output);
  read_key(root, "threads", cfg.threads);

  if (root.contains("dataset")) {
    const json& d = root["dataset"];
    check_keys(d, {"kind", "n", "test_n", "seed", "amplitude", "frequency", "halfwidth", "center",
                   "phase", "path", "label_column", "normalize", "split_seed"},
               "dataset");
    std::string kind = "sine";
    read_key(d, "kind", kind);
    if (kind == "sine") {
      cfg.dataset.kind = DatasetSpec::Kind::sine;
    } else if (kind == "csv") {
      cfg.dataset.kind = DatasetSpec::Kind::csv;
    } else {
      throw ConfigError("dataset kind must be 'sine' or 'csv'");
    }
    read_key(d, "n", cfg.dataset.sine.n);
    read_key(d, "test_n", cfg.dataset.test_n);
    read_key(d, "seed", cfg.dataset.sine.seed);
    read_key(d, "amplitude", cfg.dataset.sine.band.amplitude);
    read_key(d, "frequency", cfg.dataset.sine.band.frequency);
    read_key(d, "halfwidth", cfg.dataset.sine.band.halfwidth);
    read_key(d, "center", cfg.dataset.sine.band.center);
    read_key(d, "phase", cfg.dataset.sine.band.phase);
    read_key(d, "path", cfg.dataset.path);
    read_key(d, "label_column", cfg.dataset.label_column);
    read_key(d, "normalize", cfg.dataset.normalize);
    read_key(d, "split_seed", cfg.dataset.split_seed);
  }

  bool alpha_set = false;
  if (root.contains("strategy")) {
    const json& s = root["strategy"];
    check_keys(s, {"kind", "alpha", "gamma", "sigma", "epsilon", "mcmc_steps", "mcmc_init",
                   "condition_on_selected"},
               "strategy");
    std::string kind = to_string(cfg.strategy.kind);
    read_key(s, "kind", kind);
    cfg.strategy.kind = parse_strategy_kind(kind);
    alpha_set = s.contains("alpha");
    read_key(s, "alpha", cfg.strategy.alpha);
    read_key(s, "gamma", cfg.strategy.gamma);
    read_key(s, "sigma", cfg.strategy.sigma);
    read_key(s, "epsilon", cfg.strategy.epsilon);
    read_key(s, "mcmc_steps", cfg.strategy.mcmc.n_steps);
    read_key(s, "condition_on_selected", cfg.strategy.condition_on_selected);
    std::string init = "greedy";
    read_key(s, "mcmc_init", init);
    if (init == "greedy") {
      cfg.strategy.mcmc.init = McmcInit::greedy_mode;
    } else if (init == "uniform") {
      cfg.strategy.mcmc.init = McmcInit::uniform_random;
    } else {
      throw ConfigError("mcmc_init must be 'greedy' or 'uniform'");
    }
  }
  if (!alpha_set) cfg.strategy.alpha = default_alpha(cfg.strategy.kind);

  if (root.contains("classifier")) {
    const json& c = root["classifier"];
    check_keys(c, {"hidden", "optimizer", "epochs", "learning_rate", "members", "bootstrap"}, "classifier");
    std::string optimizer = to_string(cfg.classifier.train.optimizer);
    read_key(c, "optimizer", optimizer);
    cfg.classifier.train.optimizer = parse_optimizer(optimizer);
    read_key(c, "hidden", cfg.classifier.hidden);
    read_key(c, "epochs", cfg.classifier.train.epochs);
    read_key(c, "learning_rate", cfg.classifier.train.learning_rate);
    read_key(c, "members", cfg.classifier.train.members);
    read_key(c, "bootstrap", cfg.classifier.train.bootstrap);
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  json d;
  if (cfg.dataset.kind == DatasetSpec::Kind::sine) {
    const auto& b = cfg.dataset.sine.band;
    d = {{"kind", "sine"},           {"n", cfg.dataset.sine.n}, {"test_n", cfg.dataset.test_n},
         {"seed", cfg.dataset.sine.seed}, {"amplitude", b.amplitude}, {"frequency", b.frequency},
         {"halfwidth", b.halfwidth}, {"center", b.center},       {"phase", b.phase}};
  } else {
    d = {{"kind", "csv"},
         {"path", cfg.dataset.path},
         {"label_column", cfg.dataset.label_column},
         {"normalize", cfg.dataset.normalize},
         {"split_seed", cfg.dataset.split_seed}};
  }
  j["dataset"] = d;
  j["strategy"] = {{"kind", to_string(cfg.strategy.kind)},
                   {"alpha", cfg.strategy.alpha},
                   {"gamma", cfg.strategy.gamma},
                   {"sigma", cfg.strategy.sigma},
                   {"epsilon", cfg.strategy.epsilon},
                   {"mcmc_steps", cfg.strategy.mcmc.n_steps},
                   {"mcmc_init", cfg.strategy.mcmc.init == McmcInit::greedy_mode ? "greedy" : "uniform"},
                   {"condition_on_selected", cfg.strategy.condition_on_selected}};
  j["budget"] = cfg.budget;
  j["batch_size"] = cfg.batch_size;
  j["replicates"] = cfg.replicates;
  j["base_seed"] = cfg.base_seed;
  j["classifier"] = {{"hidden", cfg.classifier.hidden},
                     {"optimizer", to_string(cfg.classifier.train.optimizer)},
                     {"epochs", cfg.classifier.train.epochs},
                     {"learning_rate", cfg.classifier.train.learning_rate},
                     {"members", cfg.classifier.train.members},
                     {"bootstrap", cfg.classifier.train.bootstrap}};
  j["output"] = cfg.output;
  j["threads"] = cfg.threads;
  return j.dump(2);
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

}  // namespace dppal
