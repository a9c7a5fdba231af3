#pragma once

#include <cstdint>
#include <vector>

#include "dppal/linalg.hpp"
#include "dppal/subset.hpp"

namespace dppal {

// Pairwise similarity S with unit diagonal; sigma is the Gaussian bandwidth
// (0 when S was built from explicit feature vectors).
struct SimilarityMatrix {
  Matrix entries;
  double sigma = 0.0;

  Eigen::Index size() const { return entries.rows(); }
};

// L-ensemble kernel plus the exponents it was built with.
struct KernelMatrix {
  Matrix entries;
  double alpha = 1.0;
  double gamma = 0.0;

  Eigen::Index size() const { return entries.rows(); }
};

// Nonnegative, finite per-item scores.
class ScoreVector {
 public:
  explicit ScoreVector(Vector values);
  static ScoreVector ones(Eigen::Index n) { return ScoreVector(Vector::Ones(n)); }

  const Vector& values() const { return values_; }
  Eigen::Index size() const { return values_.size(); }

 private:
  Vector values_;
};

// S_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)) over the rows of `features`.
SimilarityMatrix gaussian_similarity(const Matrix& features, double sigma);

// S_ij = phi_i . phi_j after scaling every row of `features` to unit norm.
SimilarityMatrix feature_similarity(const Matrix& features);

// Seed and trial count of the Monte-Carlo estimate in default_sigma.
inline constexpr std::uint64_t kDefaultSigmaSeed = 20190611;
inline constexpr int kDefaultSigmaTrials = 10000;

// Expected closest-pair distance of k points drawn uniformly in [0,1]^d.
// Deterministic: fixed seed and trial count above.
double default_sigma(int k, int d);

// L_ij = q_i^{gamma/alpha} S_ij q_j^{gamma/alpha}. With alpha == 0 the scores
// are taken as 1 and L = S.
KernelMatrix build_kernel(const SimilarityMatrix& s, const ScoreVector& q, double alpha,
                          double gamma);

struct ConditionedKernel {
  KernelMatrix kernel;
  // index_map[r] is the ground-set index of row r of the conditioned kernel.
  std::vector<int> index_map;
};

// Largest admissible condition number of L_B before conditioning is refused.
inline constexpr double kMaxConditionNumber = 1e12;

// Kernel of the DPP conditioned on B being part of the sample, indexed by the
// complement of B. Computed as the Schur complement
//   L' = L_{B'B'} - L_{B'B} L_B^{-1} L_{BB'},
// which equals ([(L + I_{B'})^{-1}]_{B'})^{-1} - I. Throws
// SingularConditioningError when L_B is singular or cond(L_B) > 1e12.
ConditionedKernel condition_kernel(const KernelMatrix& l, const Subset& b);
Matrix condition_matrix(const Matrix& l, const Subset& b, std::vector<int>* index_map = nullptr);

// Lazy O(N^3) validation; constructors only check symmetry.
bool is_psd(const Matrix& m, double slack = kPsdSlack);

}  // namespace dppal
