#include "dppal/strategies.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "dppal/errors.hpp"
#include "dppal/mode.hpp"

namespace dppal {

namespace {

void require_pool(const PoolState& state, int k) {
  if (k < 1) throw ParameterError("batch size must be >= 1");
  const long free = state.size() - static_cast<long>(state.selected().size());
  if (free < k) {
    throw BudgetError("pool exhausted: " + std::to_string(free) + " unselected items for a batch of " +
                      std::to_string(k));
  }
}

void require_scores(const PoolState& state, const Vector& q) {
  if (q.size() != state.size()) throw InputError("need one uncertainty value per pool item");
  if (!q.allFinite() || (q.array() < 0.0).any()) {
    throw InputError("uncertainty values must be finite and nonnegative");
  }
}

// Draw k rows of `kernel` by greedy mode or by MCMC at exponent alpha, and
// map them back to ground indices.
std::vector<int> draw_rows(const PoolKernel& kernel, int k, double alpha, bool mode,
                           const McmcConfig& mcmc, std::uint64_t seed) {
  Subset local;
  if (mode) {
    local = greedy_mode(kernel.entries, k).subset;
  } else {
    McmcConfig run = mcmc;
    run.seed = seed;
    local = sample_mcmc(DppDistribution(kernel.entries, k, alpha), run);
  }
  std::vector<int> out;
  out.reserve(k);
  for (int r : local) out.push_back(kernel.index_map[r]);
  return out;
}

}  // namespace

std::string to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::uniform: return "uniform";
    case StrategyKind::passive_dpp: return "passive-dpp";
    case StrategyKind::passive_dpp_mode: return "passive-dpp-mode";
    case StrategyKind::eps_greedy: return "eps-greedy";
    case StrategyKind::active_dpp: return "active-dpp";
    case StrategyKind::active_dpp_mode: return "active-dpp-mode";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(const std::string& name) {
  for (auto kind : {StrategyKind::uniform, StrategyKind::passive_dpp, StrategyKind::passive_dpp_mode,
                    StrategyKind::eps_greedy, StrategyKind::active_dpp,
                    StrategyKind::active_dpp_mode}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown strategy '" + name + "'");
}

bool uses_uncertainty(StrategyKind kind) {
  return kind == StrategyKind::eps_greedy || kind == StrategyKind::active_dpp ||
         kind == StrategyKind::active_dpp_mode;
}

void StrategyConfig::validate() const {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("epsilon must lie in [0, 1]");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be >= 0");
  if (!std::isfinite(sigma)) throw ConfigError("sigma must be finite");
  if (mcmc.n_steps < 1) throw ConfigError("mcmc steps must be >= 1");
}

BatchSplit split_batch(int k, double epsilon) {
  if (k < 0) throw ParameterError("batch size must be >= 0");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ParameterError("epsilon must lie in [0, 1]");
  // The slack keeps e.g. (1 - 1/3) * 15 = 10.000000000000002 at 10.
  const int exploit = std::clamp(static_cast<int>(std::ceil((1.0 - epsilon) * k - 1e-9)), 0, k);
  return {exploit, k - exploit};
}

PoolState::PoolState(Matrix features, long budget)
    : features_(std::move(features)),
      budget_(budget),
      in_selected_(features_.rows(), 0),
      in_labeled_(features_.rows(), 0) {
  if (features_.rows() < 1) throw InputError("pool is empty");
  if (!features_.allFinite()) throw InputError("pool features must be finite");
}

std::vector<int> PoolState::unselected() const {
  std::vector<int> out;
  out.reserve(size() - selected_.size());
  for (int i = 0; i < size(); ++i)
    if (!in_selected_[i]) out.push_back(i);
  return out;
}

long PoolState::remaining_budget() const {
  const long free = size() - static_cast<long>(selected_.size());
  if (budget_ < 0) return free;
  return std::min(free, budget_ - static_cast<long>(selected_.size()));
}

void PoolState::add_batch(const Subset& batch) {
  batch.check_bounds(size());
  for (int i : batch) {
    if (in_selected_[i]) throw InputError("index " + std::to_string(i) + " was already selected");
  }
  if (static_cast<long>(batch.size()) > remaining_budget()) {
    throw BudgetError("batch exceeds the remaining labeling budget");
  }
  for (int i : batch) {
    in_selected_[i] = 1;
    selected_.push_back(i);
  }
}

void PoolState::reveal(int index, int label) {
  if (index < 0 || index >= size() || !in_selected_[index]) {
    throw InputError("only selected items can be labeled");
  }
  if (in_labeled_[index]) throw InputError("item " + std::to_string(index) + " already labeled");
  in_labeled_[index] = 1;
  labeled_.push_back(index);
  labels_.push_back(label);
}

const SimilarityMatrix& PoolState::similarity(double sigma) const {
  auto it = similarity_cache_.find(sigma);
  if (it == similarity_cache_.end()) {
    it = similarity_cache_
             .emplace(sigma, std::make_shared<const SimilarityMatrix>(
                                 gaussian_similarity(features_, sigma)))
             .first;
  }
  return *it->second;
}

double resolve_sigma(const StrategyConfig& cfg, int k, const PoolState& state) {
  if (cfg.sigma > 0.0) return cfg.sigma;
  return default_sigma(std::max(k, 2), static_cast<int>(state.features().cols()));
}

PoolKernel pool_kernel(const PoolState& state, double sigma, const std::vector<int>& batch,
                       bool condition_on_selected, const Vector& scores, double alpha,
                       double gamma) {
  const int n = state.size();
  std::vector<char> in_batch(n, 0);
  for (int i : batch) {
    if (i < 0 || i >= n || state.is_selected(i)) throw InputError("batch items must be unselected");
    in_batch[i] = 1;
  }

  std::vector<int> rest;
  std::vector<int> given;
  for (int i = 0; i < n; ++i) {
    if (in_batch[i] || (state.is_selected(i) && condition_on_selected)) {
      given.push_back(i);
    } else if (!state.is_selected(i)) {
      rest.push_back(i);
    }
  }

  const Matrix& s = state.similarity(sigma).entries;
  PoolKernel out;
  Matrix base;
  if (!given.empty()) {
    // Work on rest + given only, so unconditioned selections drop out.
    std::vector<int> idx = rest;
    idx.insert(idx.end(), given.begin(), given.end());
    std::vector<int> local_given(given.size());
    std::iota(local_given.begin(), local_given.end(), static_cast<int>(rest.size()));
    try {
      std::vector<int> map;
      base = condition_matrix(principal_submatrix(s, idx), Subset(local_given), &map);
      out.conditioned = true;
    } catch (const SingularConditioningError& e) {
      spdlog::warn("conditioning on {} items failed ({}); using the unconditioned kernel",
                   given.size(), e.what());
    }
  }
  if (!out.conditioned) base = principal_submatrix(s, rest);

  out.index_map = std::move(rest);
  if (scores.size() > 0 && alpha != 0.0 && gamma != 0.0) {
    Vector q(out.index_map.size());
    for (std::size_t r = 0; r < out.index_map.size(); ++r) q[r] = scores[out.index_map[r]];
    out.entries = build_kernel(SimilarityMatrix{std::move(base), sigma}, ScoreVector(q), alpha, gamma)
                      .entries;
  } else {
    out.entries = std::move(base);
  }
  return out;
}

Subset select_uniform(const PoolState& state, int k, std::uint64_t seed) {
  require_pool(state, k);
  const std::vector<int> free = state.unselected();
  std::vector<int> out;
  std::mt19937_64 rng(seed);
  std::sample(free.begin(), free.end(), std::back_inserter(out), k, rng);
  return Subset(std::move(out));
}

Subset select_passive_dpp(const PoolState& state, int k, const StrategyConfig& cfg, bool mode,
                          std::uint64_t seed) {
  require_pool(state, k);
  const double sigma = resolve_sigma(cfg, k, state);
  const PoolKernel kernel = pool_kernel(state, sigma, {}, cfg.condition_on_selected, Vector(), 1.0, 0.0);
  return Subset(draw_rows(kernel, k, cfg.alpha, mode, cfg.mcmc, seed));
}

Subset select_eps_greedy(const PoolState& state, int k, double epsilon, const Vector& q,
                         std::uint64_t seed) {
  require_pool(state, k);
  require_scores(state, q);
  const BatchSplit split = split_batch(k, epsilon);

  std::vector<int> free = state.unselected();
  // Highest uncertainty first, lowest index among ties.
  std::stable_sort(free.begin(), free.end(), [&](int a, int b) { return q[a] > q[b]; });
  std::vector<int> out(free.begin(), free.begin() + split.exploit);
  std::vector<int> rest(free.begin() + split.exploit, free.end());
  std::sort(rest.begin(), rest.end());
  std::mt19937_64 rng(seed);
  std::sample(rest.begin(), rest.end(), std::back_inserter(out), split.explore, rng);
  return Subset(std::move(out));
}

Subset select_active_dpp(const PoolState& state, int k, const StrategyConfig& cfg, const Vector& q,
                         bool mode, std::uint64_t seed) {
  require_pool(state, k);
  require_scores(state, q);
  const BatchSplit split = split_batch(k, cfg.epsilon);
  const double sigma = resolve_sigma(cfg, k, state);
  std::mt19937_64 seeder(seed);
  const std::uint64_t exploit_seed = seeder();
  const std::uint64_t explore_seed = seeder();

  std::vector<int> batch;
  if (split.exploit > 0) {
    const PoolKernel uncertain =
        pool_kernel(state, sigma, {}, cfg.condition_on_selected, q, cfg.alpha, cfg.gamma);
    try {
      batch = draw_rows(uncertain, split.exploit, cfg.alpha, mode, cfg.mcmc, exploit_seed);
    } catch (const NumericalError& e) {
      // Fewer than `exploit` items carry nonzero uncertainty.
      spdlog::warn("uncertainty DPP is degenerate ({}); drawing from the exploration DPP", e.what());
      const PoolKernel flat =
          pool_kernel(state, sigma, {}, cfg.condition_on_selected, Vector(), 1.0, 0.0);
      batch = draw_rows(flat, split.exploit, cfg.alpha, mode, cfg.mcmc, exploit_seed);
    }
  }
  if (split.explore > 0) {
    const PoolKernel explore =
        pool_kernel(state, sigma, batch, cfg.condition_on_selected, Vector(), 1.0, 0.0);
    const auto more = draw_rows(explore, split.explore, cfg.alpha, mode, cfg.mcmc, explore_seed);
    batch.insert(batch.end(), more.begin(), more.end());
  }
  return Subset(std::move(batch));
}

Subset select_batch(const PoolState& state, int k, const StrategyConfig& cfg, const Vector& q,
                    std::uint64_t seed) {
  cfg.validate();
  const bool have_q = q.size() > 0;
  if (uses_uncertainty(cfg.kind) && have_q) require_scores(state, q);
  const Vector ones = Vector::Ones(state.size());
  switch (cfg.kind) {
    case StrategyKind::uniform: return select_uniform(state, k, seed);
    case StrategyKind::passive_dpp: return select_passive_dpp(state, k, cfg, false, seed);
    case StrategyKind::passive_dpp_mode: return select_passive_dpp(state, k, cfg, true, seed);
    case StrategyKind::eps_greedy:
      // No model yet: all items tie, so the exploit part is the lowest indices.
      // Use a uniform batch instead, which is what ties mean.
      if (!have_q) return select_uniform(state, k, seed);
      return select_eps_greedy(state, k, cfg.epsilon, q, seed);
    case StrategyKind::active_dpp:
      return select_active_dpp(state, k, cfg, have_q ? q : ones, false, seed);
    case StrategyKind::active_dpp_mode:
      return select_active_dpp(state, k, cfg, have_q ? q : ones, true, seed);
  }
  throw ConfigError("unknown strategy");
}

}  // namespace dppal
