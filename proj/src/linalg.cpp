#include "dppal/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dppal {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Matrix principal_submatrix(const Matrix& m, std::span<const int> idx) {
  return submatrix(m, idx, idx);
}

Matrix submatrix(const Matrix& m, std::span<const int> rows, std::span<const int> cols) {
  Matrix out(rows.size(), cols.size());
  for (std::size_t c = 0; c < cols.size(); ++c) {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out(r, c) = m(rows[r], cols[c]);
    }
  }
  return out;
}

double log_det_psd(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() == Eigen::Success) {
    const auto diag = llt.matrixLLT().diagonal();
    if ((diag.array() > 0.0).all()) return 2.0 * diag.array().log().sum();
  }
  Eigen::LDLT<Matrix> ldlt(m);
  const Vector d = ldlt.vectorD();
  const double scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (!(d[i] > 1e-15 * scale)) return kNegInf;
    acc += std::log(d[i]);
  }
  return acc;
}

double log_sum_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

std::vector<double> log_elementary_symmetric(std::span<const double> values, int k) {
  std::vector<double> e(k + 1, kNegInf);
  e[0] = 0.0;
  for (double x : values) {
    if (!(x > 0.0)) continue;
    const double lx = std::log(x);
    for (int l = k; l >= 1; --l) {
      e[l] = log_sum_exp(e[l], lx + e[l - 1]);
    }
  }
  return e;
}

std::vector<std::vector<double>> log_elementary_symmetric_table(std::span<const double> values,
                                                                int k) {
  const std::size_t n = values.size();
  std::vector<std::vector<double>> t(k + 1, std::vector<double>(n + 1, kNegInf));
  for (std::size_t j = 0; j <= n; ++j) t[0][j] = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    const double x = values[j - 1];
    const double lx = x > 0.0 ? std::log(x) : kNegInf;
    for (int l = 1; l <= k; ++l) {
      t[l][j] = log_sum_exp(t[l][j - 1], lx == kNegInf ? kNegInf : lx + t[l - 1][j - 1]);
    }
  }
  return t;
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = j + 1; i < m.rows(); ++i) {
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
    }
  }
  return true;
}

double min_eigenvalue(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace dppal
