// Command-line front end: dataset generation, single DPP draws and modes,
// the greedy-vs-rounding benchmark, and the active-learning experiments.

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <charconv>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dppal/data.hpp"
#include "dppal/errors.hpp"
#include "dppal/harness.hpp"
#include "dppal/kernel.hpp"
#include "dppal/mode.hpp"
#include "dppal/sampler.hpp"

using namespace dppal;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitCheck = 3;

struct PoolOptions {
  std::string path;
  std::string label_column = "label";
  bool raw = false;
  std::string score_column;
};

void add_pool_options(CLI::App* cmd, PoolOptions& o) {
  cmd->add_option("--pool", o.path, "CSV file with one row per item")->required()->check(CLI::ExistingFile);
  cmd->add_option("--label-column", o.label_column,
                  "column to ignore as a label if present (default: label)");
  cmd->add_flag("--raw", o.raw, "skip min-max normalization of the features");
}

std::vector<std::string> csv_header(const std::string& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line) && line.find_first_not_of(" \t\r") == std::string::npos) {
  }
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

// Feature matrix of a pool file, plus the score column when one is named.
struct Pool {
  Matrix features;
  Vector scores;
};

Pool load_pool(const PoolOptions& o) {
  const auto header = csv_header(o.path);
  const bool has_label = std::find(header.begin(), header.end(), o.label_column) != header.end();
  Dataset ds = load_csv(o.path, has_label ? o.label_column : "", false);
  Pool pool;
  if (o.score_column.empty()) {
    pool.features = ds.features;
  } else {
    std::vector<std::string> names = header;
    if (has_label) names.erase(std::find(names.begin(), names.end(), o.label_column));
    const auto it = std::find(names.begin(), names.end(), o.score_column);
    if (it == names.end()) throw ConfigError("no column named '" + o.score_column + "'");
    const Eigen::Index col = it - names.begin();
    pool.scores = ds.features.col(col);
    pool.features.resize(ds.features.rows(), ds.features.cols() - 1);
    for (Eigen::Index c = 0, out = 0; c < ds.features.cols(); ++c) {
      if (c != col) pool.features.col(out++) = ds.features.col(c);
    }
  }
  if (!o.raw) pool.features = minmax_normalize(pool.features);
  return pool;
}

void print_subset(const Subset& s, double log_det) {
  std::cout << "indices";
  for (int i : s) std::cout << ' ' << i;
  std::cout << "\nlog_det " << log_det << '\n';
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    double v = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || res.ec != std::errc() || res.ptr != item.data() + item.size()) {
      throw ConfigError("bad grid value '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<ExperimentRecord> read_record_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  return read_records(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Determinantal point process batch selection for active learning"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "log progress (repeat for debug output)");

  // generate
  auto* gen = app.add_subcommand("generate", "write the synthetic sine-band dataset as CSV");
  SyntheticSineSpec sine;
  std::string gen_out;
  gen->add_option("--n", sine.n, "number of points")->check(CLI::PositiveNumber);
  gen->add_option("--seed", sine.seed);
  gen->add_option("--amplitude", sine.band.amplitude);
  gen->add_option("--frequency", sine.band.frequency);
  gen->add_option("--halfwidth", sine.band.halfwidth);
  gen->add_option("--out", gen_out, "output CSV (default: stdout)");

  // sample
  auto* smp = app.add_subcommand("sample", "draw one k-subset from a DPP over a CSV pool");
  PoolOptions smp_pool;
  add_pool_options(smp, smp_pool);
  int smp_k = 15;
  double smp_alpha = 1.0, smp_gamma = 0.0, smp_sigma = 0.0;
  long smp_steps = 1000;
  std::uint64_t smp_seed = 0;
  bool smp_exact = false;
  smp->add_option("--k", smp_k)->check(CLI::PositiveNumber);
  smp->add_option("--alpha", smp_alpha, "exponent on det(L_A)");
  smp->add_option("--gamma", smp_gamma, "score exponent; needs --score-column");
  smp->add_option("--sigma", smp_sigma, "kernel bandwidth (default: closest-pair heuristic)");
  smp->add_option("--score-column", smp_pool.score_column, "column holding per-item scores");
  smp->add_option("--mcmc-steps", smp_steps)->check(CLI::NonNegativeNumber);
  smp->add_option("--seed", smp_seed);
  smp->add_flag("--exact", smp_exact, "spectral sampler instead of MCMC (alpha must be 1)");

  // mode
  auto* mode = app.add_subcommand("mode", "approximate the most likely k-subset of a pool");
  PoolOptions mode_pool;
  add_pool_options(mode, mode_pool);
  int mode_k = 15;
  double mode_sigma = 0.0, mode_gamma = 0.0, mode_alpha = 4.0;
  std::string mode_alg = "mcr";
  std::uint64_t mode_seed = 0;
  mode->add_option("--k", mode_k)->check(CLI::PositiveNumber);
  mode->add_option("--algorithm", mode_alg)->check(CLI::IsMember({"greedy", "mcr"}));
  mode->add_option("--sigma", mode_sigma);
  mode->add_option("--gamma", mode_gamma, "score exponent; needs --score-column");
  mode->add_option("--alpha", mode_alpha, "divides gamma in the score weighting");
  mode->add_option("--score-column", mode_pool.score_column);
  mode->add_option("--seed", mode_seed, "seed for the mirror-descent chain");

  // mode-compare
  auto* cmp = app.add_subcommand("mode-compare", "greedy vs maximum coordinate rounding on random points");
  int cmp_instances = 100, cmp_points = 200, cmp_k = 3, cmp_threads = 0;
  double cmp_sigma = 1.0, cmp_threshold = 0.85;
  std::uint64_t cmp_seed = 0;
  bool cmp_check = false;
  cmp->add_option("--instances", cmp_instances)->check(CLI::PositiveNumber);
  cmp->add_option("--points", cmp_points)->check(CLI::PositiveNumber);
  cmp->add_option("--sigma", cmp_sigma)->check(CLI::PositiveNumber);
  cmp->add_option("--k", cmp_k)->check(CLI::PositiveNumber);
  cmp->add_option("--seed", cmp_seed);
  cmp->add_option("--threads", cmp_threads);
  cmp->add_flag("--check", cmp_check, "exit 3 when the better-or-equal rate is below --threshold");
  cmp->add_option("--threshold", cmp_threshold);

  // al-run
  auto* run = app.add_subcommand("al-run", "run an active-learning experiment");
  std::string run_config, run_out, run_strategy;
  std::optional<int> run_replicates, run_threads;
  std::optional<std::uint64_t> run_seed;
  run->add_option("--config", run_config, "JSON config (defaults if omitted)")->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "records file (JSON lines)");
  run->add_option("--replicates", run_replicates)->check(CLI::PositiveNumber);
  run->add_option("--seed", run_seed, "base seed");
  run->add_option("--strategy", run_strategy, "override the configured strategy");
  run->add_option("--threads", run_threads);

  // tune
  auto* tune = app.add_subcommand("tune", "grid search gamma on fake labels");
  std::string tune_config, tune_grid, tune_strategy = "active-dpp-mode";
  int tune_replicates = 20;
  std::uint64_t tune_seed = 0;
  std::optional<int> tune_threads;
  tune->add_option("--config", tune_config)->check(CLI::ExistingFile);
  tune->add_option("--strategy", tune_strategy);
  tune->add_option("--grid", tune_grid, "comma-separated gamma values (default 0,...,7)");
  tune->add_option("--replicates", tune_replicates)->check(CLI::PositiveNumber);
  tune->add_option("--seed", tune_seed);
  tune->add_option("--threads", tune_threads);

  // report
  auto* rep = app.add_subcommand("report", "summarize records files");
  std::vector<std::string> rep_records;
  std::string rep_curves;
  rep->add_option("records", rep_records, "records files")->required()->check(CLI::ExistingFile);
  rep->add_option("--curves", rep_curves, "write accuracy curves as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }
  spdlog::set_level(verbosity >= 2 ? spdlog::level::debug
                    : verbosity == 1 ? spdlog::level::info
                                     : spdlog::level::warn);

  try {
    if (*gen) {
      const Dataset ds = generate_sine_dataset(sine);
      if (gen_out.empty()) {
        write_csv(ds, std::cout);
      } else {
        save_csv(ds, gen_out);
      }
    } else if (*smp) {
      const Pool pool = load_pool(smp_pool);
      if (smp_gamma != 0.0 && pool.scores.size() == 0) throw ConfigError("--gamma needs --score-column");
      const double sigma = smp_sigma > 0 ? smp_sigma : default_sigma(smp_k, static_cast<int>(pool.features.cols()));
      const ScoreVector q = pool.scores.size() ? ScoreVector(pool.scores) : ScoreVector::ones(pool.features.rows());
      const KernelMatrix l = build_kernel(gaussian_similarity(pool.features, sigma), q, smp_alpha, smp_gamma);
      const DppDistribution dist(l.entries, smp_k, smp_alpha);
      Subset s;
      if (smp_exact) {
        s = sample_exact(dist, smp_seed);
      } else {
        McmcConfig mc;
        mc.n_steps = smp_steps;
        mc.seed = smp_seed;
        s = sample_mcmc(dist, mc);
      }
      print_subset(s, log_det_psd(principal_submatrix(l.entries, s)));
    } else if (*mode) {
      const Pool pool = load_pool(mode_pool);
      if (mode_gamma != 0.0 && pool.scores.size() == 0) throw ConfigError("--gamma needs --score-column");
      const double sigma =
          mode_sigma > 0 ? mode_sigma : default_sigma(mode_k, static_cast<int>(pool.features.cols()));
      const ScoreVector q = pool.scores.size() ? ScoreVector(pool.scores) : ScoreVector::ones(pool.features.rows());
      const KernelMatrix l = build_kernel(gaussian_similarity(pool.features, sigma), q, mode_alpha, mode_gamma);
      ModeResult r;
      if (mode_alg == "greedy") {
        r = greedy_mode(l.entries, mode_k);
      } else {
        McrConfig mc;
        mc.smd.seed = mode_seed;
        r = mcr_mode(l.entries, mode_k, mc);
      }
      print_subset(r.subset, r.log_det);
    } else if (*cmp) {
      const ModeCompareSummary s = mode_compare(cmp_instances, cmp_points, cmp_sigma, cmp_k, cmp_seed, cmp_threads);
      std::cout << "instances " << s.instances.size() << "\nmcr_strictly_better " << s.mcr_strictly_better
                << "\nmcr_better_or_equal " << s.mcr_better_or_equal << '\n';
      if (cmp_check && s.mcr_better_or_equal < cmp_threshold) {
        std::cerr << "better-or-equal rate " << s.mcr_better_or_equal << " is below " << cmp_threshold << '\n';
        return kExitCheck;
      }
    } else if (*run) {
      ExperimentConfig cfg = run_config.empty() ? ExperimentConfig{} : load_config(run_config);
      if (!run_strategy.empty()) {
        cfg.strategy.kind = parse_strategy_kind(run_strategy);
        cfg.strategy.alpha = default_alpha(cfg.strategy.kind);
      }
      if (run_replicates) cfg.replicates = *run_replicates;
      if (run_seed) cfg.base_seed = *run_seed;
      if (run_threads) cfg.threads = *run_threads;
      if (!run_out.empty()) cfg.output = run_out;
      const auto records = run_experiment(cfg);
      if (!cfg.output.empty()) {
        std::ofstream out(cfg.output);
        if (!out) throw InputError("cannot write '" + cfg.output + "'");
        write_records(records, out);
      }
      write_summary_table(summarize(records), std::cout);
    } else if (*tune) {
      ExperimentConfig cfg = tune_config.empty() ? ExperimentConfig{} : load_config(tune_config);
      if (tune_config.empty()) {
        cfg.strategy.kind = parse_strategy_kind(tune_strategy);
        cfg.strategy.alpha = default_alpha(cfg.strategy.kind);
      }
      if (tune_threads) cfg.threads = *tune_threads;
      const auto grid = tune_grid.empty() ? default_gamma_grid() : parse_grid(tune_grid);
      const TuneResult r = tune_gamma(cfg, grid, tune_replicates, tune_seed);
      std::cout << "gamma,mean,std,n\n";
      for (const auto& row : r.grid) {
        std::cout << row.gamma << ',' << row.accuracy.mean << ',' << row.accuracy.stddev << ','
                  << row.accuracy.n << '\n';
      }
      std::cout << "best_gamma " << r.best_gamma << '\n';
    } else if (*rep) {
      std::vector<ExperimentRecord> records;
      for (const auto& path : rep_records) {
        auto more = read_record_file(path);
        records.insert(records.end(), more.begin(), more.end());
      }
      write_summary_table(summarize(records), std::cout);
      if (!rep_curves.empty()) {
        std::ofstream out(rep_curves);
        if (!out) throw InputError("cannot write '" + rep_curves + "'");
        write_curve_csv(records, out);
      }
    }
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return 0;
}
