#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "dppal/linalg.hpp"
#include "dppal/subset.hpp"

namespace dppal {

using Rng = std::mt19937_64;

// k-DPP with P(A) proportional to det(L_A)^alpha over subsets of size k.
struct DppDistribution {
  DppDistribution(Matrix kernel, int k, double alpha = 1.0);

  Matrix kernel;
  int k;
  double alpha;

  int ground_size() const { return static_cast<int>(kernel.rows()); }
};

enum class McmcInit { greedy_mode, uniform_random };

struct McmcConfig {
  long n_steps = 1000;
  std::uint64_t seed = 0;
  McmcInit init = McmcInit::greedy_mode;
};

// Largest number of subsets brute_force_pmf will enumerate.
inline constexpr double kMaxEnumeratedSubsets = 1e6;

// Exact pmf over all size-k subsets. Throws CapacityError when C(N,k) > 1e6
// and DegenerateError when every subset has zero mass.
std::map<Subset, double> brute_force_pmf(const DppDistribution& dist);

// Exact k-DPP sampler (alpha must be 1). The eigendecomposition and the
// elementary symmetric polynomial table are computed once; draw() is then
// O(N k^3).
class ExactSampler {
 public:
  explicit ExactSampler(const DppDistribution& dist);

  Subset draw(Rng& rng) const;

 private:
  int k_;
  Vector eigenvalues_;
  Matrix eigenvectors_;
  std::vector<std::vector<double>> log_esp_;
};

Subset sample_exact(const DppDistribution& dist, std::uint64_t seed);

// Metropolis exchange walk over size-k subsets: pick a member uniformly, pick
// a non-member uniformly, accept the swap with probability
// min(1, (det L_{A-i+j} / det L_A)^alpha). The inverse of L_A is kept up to
// date with O(k^2) rank-one updates, so a proposal costs O(k^2).
class ExchangeChain {
 public:
  ExchangeChain(const Matrix& kernel, double alpha, const Subset& start);

  // One proposal; returns true when it was accepted.
  bool step(Rng& rng);
  void run(long n_steps, Rng& rng);

  Subset state() const { return Subset(members_); }
  double log_det() const;
  long accepted() const { return accepted_; }

  // det(L_{A - members[pos] + j}) / det(L_A) from the maintained inverse.
  double swap_ratio(int pos, int j) const;
  // Same ratio from two fresh determinants.
  double swap_ratio_naive(int pos, int j) const;

  const std::vector<int>& members() const { return members_; }

 private:
  template <int K>
  bool step_fixed(Rng& rng);
  template <int K>
  void commit_swap(int pos, int slot, double ratio);
  void refresh();

  const Matrix& kernel_;
  double alpha_;
  int n_;
  int k_;
  std::vector<int> members_;
  std::vector<int> outside_;
  Matrix inverse_;  // (L_A)^{-1}, only tracked when alpha > 0
  mutable std::vector<double> scratch_c_;
  mutable std::vector<double> scratch_w_;
  std::vector<double> scratch_m_;
  double log_det_ = 0.0;
  double pending_ratio_ = 1.0;
  long accepted_ = 0;
  long since_refresh_ = 0;
};

// Runs an exchange chain for cfg.n_steps from the configured start state.
// Throws InitializationError when no start set with positive determinant is
// found within N*k random swaps.
Subset sample_mcmc(const DppDistribution& dist, const McmcConfig& cfg);

// Total variation distance between two pmfs over subsets.
double total_variation(const std::map<Subset, double>& p, const std::map<Subset, double>& q);

}  // namespace dppal
