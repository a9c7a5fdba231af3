#include "dppal/kernel.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "dppal/errors.hpp"

namespace dppal {

namespace {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw InputError(std::string(what) + " contains non-finite values");
}

}  // namespace

ScoreVector::ScoreVector(Vector values) : values_(std::move(values)) {
  for (Eigen::Index i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) throw InputError("score " + std::to_string(i) + " is not finite");
    if (values_[i] < 0.0) throw InputError("score " + std::to_string(i) + " is negative");
  }
}

SimilarityMatrix gaussian_similarity(const Matrix& features, double sigma) {
  if (features.rows() < 1 || features.cols() < 1) throw InputError("empty feature matrix");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ParameterError("sigma must be positive");
  require_finite(features, "feature matrix");

  const Eigen::Index n = features.rows();
  const double scale = -1.0 / (2.0 * sigma * sigma);
  SimilarityMatrix s{Matrix(n, n), sigma};
  for (Eigen::Index j = 0; j < n; ++j) {
    s.entries(j, j) = 1.0;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double v = std::exp((features.row(i) - features.row(j)).squaredNorm() * scale);
      s.entries(i, j) = v;
      s.entries(j, i) = v;
    }
  }
  return s;
}

SimilarityMatrix feature_similarity(const Matrix& features) {
  if (features.rows() < 1 || features.cols() < 1) throw InputError("empty feature matrix");
  require_finite(features, "feature matrix");
  Matrix phi = features;
  for (Eigen::Index i = 0; i < phi.rows(); ++i) {
    const double norm = phi.row(i).norm();
    if (norm == 0.0) throw InputError("feature row " + std::to_string(i) + " has zero norm");
    phi.row(i) /= norm;
  }
  SimilarityMatrix s{phi * phi.transpose(), 0.0};
  s.entries.diagonal().setOnes();
  s.entries = 0.5 * (s.entries + s.entries.transpose()).eval();
  return s;
}

double default_sigma(int k, int d) {
  if (k < 2) throw ParameterError("default_sigma needs k >= 2");
  if (d < 1) throw ParameterError("default_sigma needs d >= 1");

  std::mt19937_64 rng(kDefaultSigmaSeed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix pts(k, d);
  double total = 0.0;
  for (int t = 0; t < kDefaultSigmaTrials; ++t) {
    for (int i = 0; i < k; ++i)
      for (int c = 0; c < d; ++c) pts(i, c) = unif(rng);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) best = std::min(best, (pts.row(i) - pts.row(j)).squaredNorm());
    total += std::sqrt(best);
  }
  return total / kDefaultSigmaTrials;
}

KernelMatrix build_kernel(const SimilarityMatrix& s, const ScoreVector& q, double alpha,
                          double gamma) {
  if (s.entries.rows() != q.size()) throw InputError("score vector length does not match kernel");
  if (!(alpha >= 0.0) || !(gamma >= 0.0)) throw ParameterError("alpha and gamma must be >= 0");
  if (!is_symmetric(s.entries, 1e-12)) throw InputError("similarity matrix is not symmetric");

  KernelMatrix l{s.entries, alpha, gamma};
  if (alpha == 0.0 || gamma == 0.0) return l;

  const double expo = gamma / alpha;
  const Vector w = q.values().array().pow(expo).matrix();
  l.entries = w.asDiagonal() * s.entries * w.asDiagonal();
  return l;
}

Matrix condition_matrix(const Matrix& l, const Subset& b, std::vector<int>* index_map) {
  const int n = static_cast<int>(l.rows());
  b.check_bounds(n);
  std::vector<int> rest = complement(b, n);
  if (index_map) *index_map = rest;
  if (b.empty()) return l;

  const Matrix lbb = principal_submatrix(l, b.indices());
  Eigen::SelfAdjointEigenSolver<Matrix> es(lbb, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    throw SingularConditioningError("conditioning set " + b.to_string() +
                                    " has numerically zero probability (cond(L_B) = " +
                                    std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }

  const Matrix lrb = submatrix(l, rest, b.indices());
  Eigen::LLT<Matrix> llt(lbb);
  if (llt.info() != Eigen::Success) {
    throw SingularConditioningError("Cholesky of L_B failed for " + b.to_string());
  }
  const Matrix half = llt.matrixL().solve(lrb.transpose());  // |B| x |rest|
  Matrix out = principal_submatrix(l, rest);
  out.noalias() -= half.transpose() * half;
  out = 0.5 * (out + out.transpose()).eval();
  return out;
}

ConditionedKernel condition_kernel(const KernelMatrix& l, const Subset& b) {
  ConditionedKernel out;
  out.kernel.alpha = l.alpha;
  out.kernel.gamma = l.gamma;
  out.kernel.entries = condition_matrix(l.entries, b, &out.index_map);
  return out;
}

bool is_psd(const Matrix& m, double slack) {
  return is_symmetric(m, 1e-10) && min_eigenvalue(m) >= -slack;
}

}  // namespace dppal
