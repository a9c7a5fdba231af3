#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace dppal {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Numerical slack used for PSD and symmetry checks on kernel matrices.
inline constexpr double kPsdSlack = 1e-8;

Matrix principal_submatrix(const Matrix& m, std::span<const int> idx);
Matrix submatrix(const Matrix& m, std::span<const int> rows, std::span<const int> cols);

// log det of a symmetric PSD matrix. Cholesky first, pivoted LDLT when the
// Cholesky factorisation breaks down; -inf when the matrix is singular.
double log_det_psd(const Matrix& m);

double log_sum_exp(double a, double b);

// log e_0 .. log e_k of the elementary symmetric polynomials of `values`
// (clamped at zero), via the summation recurrence e_l^n = e_l^{n-1} +
// x_n e_{l-1}^{n-1} evaluated in log space. Entries are -inf where e_l = 0.
std::vector<double> log_elementary_symmetric(std::span<const double> values, int k);

// Full table t[l][n] = log e_l(values[0..n-1]) for l <= k, n <= size.
std::vector<std::vector<double>> log_elementary_symmetric_table(std::span<const double> values,
                                                                int k);

// Binomial coefficient as a double (exact up to 2^53).
double binomial(int n, int k);

// Visits every size-k subset of {0..n-1} in lexicographic order.
template <typename Fn>
void for_each_combination(int n, int k, Fn&& fn) {
  if (k < 0 || k > n) return;
  std::vector<int> c(k);
  for (int i = 0; i < k; ++i) c[i] = i;
  while (true) {
    fn(std::span<const int>(c));
    int i = k - 1;
    while (i >= 0 && c[i] == n - k + i) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
  }
}

bool is_symmetric(const Matrix& m, double tol);
double min_eigenvalue(const Matrix& m);

}  // namespace dppal
