#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dppal/kernel.hpp"
#include "dppal/linalg.hpp"
#include "dppal/sampler.hpp"
#include "dppal/subset.hpp"

namespace dppal {

enum class StrategyKind { uniform, passive_dpp, passive_dpp_mode, eps_greedy, active_dpp, active_dpp_mode };

std::string to_string(StrategyKind kind);
// Accepts the names produced by to_string; ConfigError otherwise.
StrategyKind parse_strategy_kind(const std::string& name);
// Strategies that need classifier uncertainty scores.
bool uses_uncertainty(StrategyKind kind);

struct StrategyConfig {
  StrategyKind kind = StrategyKind::uniform;
  double alpha = 4.0;
  double gamma = 5.0;
  // <= 0 selects default_sigma(k, d).
  double sigma = 0.0;
  double epsilon = 1.0 / 3.0;
  McmcConfig mcmc;
  // Condition DPP strategies on everything selected in earlier iterations.
  bool condition_on_selected = true;

  void validate() const;
};

// Exploit/explore sizes for a batch of k: exploit = ceil((1 - eps) k),
// explore = k - exploit.
struct BatchSplit {
  int exploit;
  int explore;
};
BatchSplit split_batch(int k, double epsilon);

// Ground set plus everything chosen so far. The Gaussian similarity over the
// full ground set is built on first use for each bandwidth and reused.
class PoolState {
 public:
  // budget < 0 means unlimited.
  explicit PoolState(Matrix features, long budget = -1);

  const Matrix& features() const { return features_; }
  int size() const { return static_cast<int>(features_.rows()); }

  // Indices in the order they were selected.
  const std::vector<int>& selected() const { return selected_; }
  bool is_selected(int i) const { return in_selected_.at(i) != 0; }
  std::vector<int> unselected() const;
  long remaining_budget() const;

  const std::vector<int>& labeled() const { return labeled_; }
  const std::vector<int>& labels() const { return labels_; }

  // InputError on duplicates, out-of-range or already-selected indices;
  // BudgetError when the batch exceeds the remaining budget.
  void add_batch(const Subset& batch);
  // Record the oracle label of a selected index.
  void reveal(int index, int label);

  const SimilarityMatrix& similarity(double sigma) const;

 private:
  Matrix features_;
  long budget_;
  std::vector<int> selected_;
  std::vector<char> in_selected_;
  std::vector<int> labeled_;
  std::vector<int> labels_;
  std::vector<char> in_labeled_;
  mutable std::map<double, std::shared_ptr<const SimilarityMatrix>> similarity_cache_;
};

// Bandwidth a strategy will use for batches of k on this pool.
double resolve_sigma(const StrategyConfig& cfg, int k, const PoolState& state);

// Kernel used by the DPP strategies. Rows are the ground items that are
// neither selected nor in `batch` (items already drawn this iteration). S is
// conditioned on `batch`, plus the earlier selections when
// `condition_on_selected`, and then weighted by `scores` (one per ground
// item; empty means all ones). A singular conditioning is dropped with a
// logged warning.
struct PoolKernel {
  Matrix entries;
  std::vector<int> index_map;  // row r <-> ground index index_map[r]
  bool conditioned = false;
};
PoolKernel pool_kernel(const PoolState& state, double sigma, const std::vector<int>& batch,
                       bool condition_on_selected, const Vector& scores, double alpha,
                       double gamma);

Subset select_uniform(const PoolState& state, int k, std::uint64_t seed);

Subset select_passive_dpp(const PoolState& state, int k, const StrategyConfig& cfg, bool mode,
                          std::uint64_t seed);

// `q` holds one uncertainty value per ground item.
Subset select_eps_greedy(const PoolState& state, int k, double epsilon, const Vector& q,
                         std::uint64_t seed);

Subset select_active_dpp(const PoolState& state, int k, const StrategyConfig& cfg, const Vector& q,
                         bool mode, std::uint64_t seed);

// Dispatch on cfg.kind. `q` may be empty for strategies that ignore it; for
// active strategies an empty q means "no model yet" and is read as all ones.
Subset select_batch(const PoolState& state, int k, const StrategyConfig& cfg, const Vector& q,
                    std::uint64_t seed);

}  // namespace dppal
