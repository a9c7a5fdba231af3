#pragma once

#include <cstdint>
#include <string>

#include "dppal/linalg.hpp"
#include "dppal/subset.hpp"

namespace dppal {

// Nonnegative vector on the scaled simplex sum(v) = k.
class RelaxationPoint {
 public:
  RelaxationPoint(Vector v, int k);
  static RelaxationPoint uniform(Eigen::Index n, int k);

  const Vector& values() const { return v_; }
  int k() const { return k_; }
  Eigen::Index size() const { return v_.size(); }

 private:
  Vector v_;
  int k_;
};

enum class ModeAlgorithm { greedy, mcr };
std::string to_string(ModeAlgorithm a);

struct ModeResult {
  Subset subset;
  double log_det = 0.0;  // log det(L_A) of the returned subset
  ModeAlgorithm algorithm = ModeAlgorithm::greedy;
  long iterations = 0;
};

// log g(v) with g(v) = sum_{|A|=k} det(L_A) prod_{i in A} v_i, evaluated as
// log e_k of the eigenvalues of diag(sqrt v) L diag(sqrt v). Returns -inf
// when g(v) = 0.
double generating_polynomial(const Matrix& l, int k, const Vector& v);
inline double generating_polynomial(const Matrix& l, const RelaxationPoint& v) {
  return generating_polynomial(l, v.k(), v.values());
}

// Marginals p_i = P(i in A) under P(A) ~ det(L_A) prod v. Enumeration when
// C(N,k) <= 1e6, otherwise the spectral k-DPP marginal formula.
Vector dpp_marginals(const Matrix& l, int k, const Vector& v);

// Greedy volume maximisation: add the item with the largest Schur-complement
// gain k times; ties go to the lowest index. DegenerateError when every
// remaining gain is zero before k items are chosen.
ModeResult greedy_mode(const Matrix& l, int k);

// indicator: X = 1_A. transition: X = k P(add j | A - i) for one uniformly
// dropped i. averaged_transition: the same averaged over every i in A, which
// is k times the full one-step transition probability of the chain.
enum class GradientVariant { indicator, transition, averaged_transition };

struct SmdConfig {
  double step_size = 0.1;
  // 0 picks max(2000, 200 * N / k).
  long n_iters = 0;
  std::uint64_t seed = 0;
  GradientVariant variant = GradientVariant::transition;
  // Iterations that use the indicator gradient before switching to `variant`.
  long indicator_warmup = 50;
  // Optional starting point (empty: uniform k/N).
  Vector initial_point;
};

struct SmdResult {
  RelaxationPoint point;
  double log_g;
  long iterations;
  // Raw last iterate and the average of the iterates after burn-in; empty
  // for solvers without a trajectory.
  Vector last_iterate;
  Vector tail_average;
};

// Stochastic mirror ascent with the entropic mirror map:
//   A ~ P(A) ~ prod v det(L_A) (one heat-bath exchange step of a persistent chain),
//   u = v + eta X,  v = k u / sum(u).
// X is 1_A or the transition-probability vector (see transition_gradient).
// Returns the best point by exact log g among iterates and running tail
// averages at the evaluation checkpoints.
SmdResult smd_relaxation_detailed(const Matrix& l, int k, const SmdConfig& cfg);
RelaxationPoint smd_relaxation(const Matrix& l, int k, const SmdConfig& cfg);

// Drop a uniformly chosen member i of A; X_j = k P(add j | A - i) where
// P(add j) ~ v_j det(L_{A-i+j}). Sums to k.
Vector transition_gradient(const Matrix& l, int k, const Vector& v, const Subset& a,
                           std::uint64_t seed);

struct ExactRelaxationConfig {
  long max_iters = 200000;
  // Stop once max_i d/dv_i log g <= 1 + tol (the KKT multiplier is 1).
  double tol = 1e-9;
};

// Deterministic maximiser of log g on the simplex for enumerable instances.
// Multiplicative fixed-point ascent v <- p(v), which never decreases g for
// homogeneous polynomials with nonnegative coefficients.
SmdResult exact_relaxation(const Matrix& l, int k, const ExactRelaxationConfig& cfg = {},
                           const Vector& initial_point = Vector());

struct McrConfig {
  SmdConfig smd;
  // Relaxations with C(N', k') at or below this use exact_relaxation.
  double exact_threshold = 1e5;
  bool warm_start = false;
};

// Maximum coordinate rounding: solve the relaxation, keep the largest
// coordinate, condition the kernel on it and recurse with k - 1.
ModeResult mcr_mode(const Matrix& l, int k, const McrConfig& cfg = {});

}  // namespace dppal
