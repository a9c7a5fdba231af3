#include "dppal/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>

#include "dppal/errors.hpp"
#include "dppal/mode.hpp"

namespace dppal {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr long kRefreshEvery = 256;

// Eigenvalues below this fraction of the largest one count as zero rank.
constexpr double kRankTolerance = 1e-10;

int draw_index(std::span<const double> probs, Rng& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    u -= probs[i];
    if (u < 0.0) return static_cast<int>(i);
  }
  // Rounding left a sliver of mass; fall back to the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

DppDistribution::DppDistribution(Matrix kernel_in, int k_in, double alpha_in)
    : kernel(std::move(kernel_in)), k(k_in), alpha(alpha_in) {
  if (kernel.rows() != kernel.cols()) throw InputError("kernel matrix must be square");
  if (!kernel.allFinite()) throw InputError("kernel matrix contains non-finite values");
  if (k < 0 || k > kernel.rows()) throw ParameterError("k must lie in [0, N]");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw ParameterError("alpha must be >= 0");
}

std::map<Subset, double> brute_force_pmf(const DppDistribution& dist) {
  const int n = dist.ground_size();
  if (binomial(n, dist.k) > kMaxEnumeratedSubsets) {
    throw CapacityError("C(" + std::to_string(n) + "," + std::to_string(dist.k) +
                        ") subsets exceed the enumeration guard");
  }
  std::vector<Subset> subsets;
  std::vector<double> logw;
  for_each_combination(n, dist.k, [&](std::span<const int> c) {
    subsets.emplace_back(std::vector<int>(c.begin(), c.end()));
    const double ld = log_det_psd(principal_submatrix(dist.kernel, c));
    logw.push_back(dist.alpha == 0.0 ? 0.0 : (ld == kNegInf ? kNegInf : dist.alpha * ld));
  });
  const double hi = *std::max_element(logw.begin(), logw.end());
  if (hi == kNegInf) throw DegenerateError("every size-k subset has zero determinant");
  double z = 0.0;
  for (double& w : logw) {
    w = std::exp(w - hi);
    z += w;
  }
  std::map<Subset, double> pmf;
  for (std::size_t i = 0; i < subsets.size(); ++i) pmf.emplace(std::move(subsets[i]), logw[i] / z);
  return pmf;
}

ExactSampler::ExactSampler(const DppDistribution& dist) : k_(dist.k) {
  if (dist.alpha != 1.0) {
    throw UnsupportedExponentError("exact sampling supports alpha = 1 only; use MCMC");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(dist.kernel);
  eigenvalues_ = es.eigenvalues();
  eigenvectors_ = es.eigenvectors();
  const double top = std::max(0.0, eigenvalues_.maxCoeff());
  int rank = 0;
  for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
    if (eigenvalues_[i] > kRankTolerance * top) {
      ++rank;
    } else {
      eigenvalues_[i] = 0.0;
    }
  }
  if (rank < k_) {
    throw DegenerateError("kernel rank " + std::to_string(rank) + " is below k = " +
                          std::to_string(k_));
  }
  log_esp_ = log_elementary_symmetric_table(
      std::span<const double>(eigenvalues_.data(), eigenvalues_.size()), k_);
}

Subset ExactSampler::draw(Rng& rng) const {
  const int n = static_cast<int>(eigenvalues_.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  // Phase 1: choose k eigenvectors, item m with probability
  // lambda_m e_{l-1}^{m-1} / e_l^m.
  std::vector<int> chosen;
  int l = k_;
  for (int m = n; m >= 1 && l > 0; --m) {
    const double lam = eigenvalues_[m - 1];
    if (lam <= 0.0) continue;
    const double logp = std::log(lam) + log_esp_[l - 1][m - 1] - log_esp_[l][m];
    if (m == l || std::log(unif(rng)) < logp) {
      chosen.push_back(m - 1);
      --l;
    }
  }

  // Phase 2: sample from the projection DPP spanned by the chosen vectors.
  Matrix basis(n, chosen.size());
  for (std::size_t c = 0; c < chosen.size(); ++c) basis.col(c) = eigenvectors_.col(chosen[c]);

  std::vector<int> out;
  std::vector<double> probs(n);
  while (basis.cols() > 0) {
    const Vector w = basis.rowwise().squaredNorm();
    const double total = w.sum();
    for (int i = 0; i < n; ++i) probs[i] = w[i] / total;
    const int item = draw_index(probs, rng);
    out.push_back(item);

    Eigen::Index pivot = 0;
    basis.row(item).cwiseAbs().maxCoeff(&pivot);
    const Vector pcol = basis.col(pivot);
    const double pval = pcol[item];
    Matrix next(n, basis.cols() - 1);
    for (Eigen::Index c = 0, dst = 0; c < basis.cols(); ++c) {
      if (c == pivot) continue;
      next.col(dst++) = basis.col(c) - pcol * (basis(item, c) / pval);
    }
    if (next.cols() > 0) {
      Eigen::HouseholderQR<Matrix> qr(next);
      basis = qr.householderQ() * Matrix::Identity(n, next.cols());
    } else {
      basis = next;
    }
  }
  return Subset(std::move(out));
}

Subset sample_exact(const DppDistribution& dist, std::uint64_t seed) {
  Rng rng(seed);
  return ExactSampler(dist).draw(rng);
}

ExchangeChain::ExchangeChain(const Matrix& kernel, double alpha, const Subset& start)
    : kernel_(kernel),
      alpha_(alpha),
      n_(static_cast<int>(kernel.rows())),
      k_(static_cast<int>(start.size())),
      members_(start.begin(), start.end()) {
  start.check_bounds(n_);
  outside_ = complement(start, n_);
  scratch_c_.resize(k_);
  scratch_w_.resize(k_);
  scratch_m_.resize(k_);
  refresh();
}

void ExchangeChain::refresh() {
  since_refresh_ = 0;
  pending_ratio_ = 1.0;
  if (alpha_ == 0.0) return;
  const Matrix la = principal_submatrix(kernel_, members_);
  log_det_ = log_det_psd(la);
  if (log_det_ == kNegInf) {
    inverse_.resize(0, 0);
    return;
  }
  Eigen::LLT<Matrix> llt(la);
  if (llt.info() == Eigen::Success) {
    inverse_ = llt.solve(Matrix::Identity(k_, k_));
  } else {
    inverse_ = la.ldlt().solve(Matrix::Identity(k_, k_));
  }
}

namespace {

// Hot loops of the exchange chain. K > 0 fixes the subset size at compile
// time so the tiny loops unroll; K == 0 reads it from `k`.

// det ratio for swapping slot `pos` for the item whose kernel column is
// `col`. Fills c = L_{A,j} and w = M c.
template <int K>
inline double ratio_kernel(const double* col, const int* members, const double* inv, int k,
                           int pos, double ljj, double* c, double* w) {
  const int kk = K > 0 ? K : k;
  for (int r = 0; r < kk; ++r) c[r] = col[members[r]];
  double quad = 0.0;
  for (int r = 0; r < kk; ++r) {
    const double* mr = inv + static_cast<std::ptrdiff_t>(r) * kk;  // column r == row r
    double acc = 0.0;
    for (int s = 0; s < kk; ++s) acc += mr[s] * c[s];
    w[r] = acc;
    quad += acc * c[r];
  }
  return inv[static_cast<std::ptrdiff_t>(pos) * kk + pos] * (ljj - quad) + w[pos] * w[pos];
}

// Replace slot `pos` by j in the inverse. With m = M e_p, b = L_{A,j} with
// b_p = 0 and u = (M - m m'/m_pp) b, the new inverse is
//   M - m m'/m_pp + u u'/s  off slot p,  [-u/s; 1/s] in slot p,
// where s = L_jj - b'u. Uses c and w = M c left by ratio_kernel.
template <int K>
inline void update_kernel(double* inv, int k, int pos, double ljj, const double* c, double* w,
                          double* m) {
  const int kk = K > 0 ? K : k;
  for (int r = 0; r < kk; ++r) m[r] = inv[static_cast<std::ptrdiff_t>(pos) * kk + r];
  const double inv_mpp = 1.0 / m[pos];
  const double cp = c[pos];
  // M b = M c - m c_p; m'b is its p-th entry.
  for (int r = 0; r < kk; ++r) w[r] -= m[r] * cp;
  const double mb = w[pos] * inv_mpp;
  for (int r = 0; r < kk; ++r) w[r] -= m[r] * mb;
  w[pos] = 0.0;
  double bu = 0.0;
  for (int r = 0; r < kk; ++r) bu += c[r] * w[r];
  const double inv_schur = 1.0 / (ljj - bu);
  for (int col = 0; col < kk; ++col) {
    double* dst = inv + static_cast<std::ptrdiff_t>(col) * kk;
    const double fm = m[col] * inv_mpp;
    const double fu = w[col] * inv_schur;
    for (int r = 0; r < kk; ++r) dst[r] += w[r] * fu - m[r] * fm;
  }
  for (int r = 0; r < kk; ++r) {
    const double v = -w[r] * inv_schur;
    inv[static_cast<std::ptrdiff_t>(pos) * kk + r] = v;
    inv[static_cast<std::ptrdiff_t>(r) * kk + pos] = v;
  }
  inv[static_cast<std::ptrdiff_t>(pos) * kk + pos] = inv_schur;
}

}  // namespace

double ExchangeChain::swap_ratio(int pos, int j) const {
  // det(L_{A-i+j}) / det(L_A) = M_pp (L_jj - c'Mc) + (Mc)_p^2, c = L_{A,j}.
  const double* col = kernel_.data() + static_cast<std::ptrdiff_t>(j) * n_;
  return ratio_kernel<0>(col, members_.data(), inverse_.data(), k_, pos, col[j],
                         scratch_c_.data(), scratch_w_.data());
}

double ExchangeChain::swap_ratio_naive(int pos, int j) const {
  std::vector<int> next = members_;
  next[pos] = j;
  const double a = log_det_psd(principal_submatrix(kernel_, members_));
  const double b = log_det_psd(principal_submatrix(kernel_, next));
  if (b == kNegInf) return 0.0;
  return std::exp(b - a);
}

double ExchangeChain::log_det() const {
  return log_det_ + std::log(pending_ratio_);
}

template <int K>
void ExchangeChain::commit_swap(int pos, int slot, double ratio) {
  const int j = outside_[slot];
  ++accepted_;
  if (alpha_ == 0.0 || inverse_.size() == 0 || ++since_refresh_ >= kRefreshEvery) {
    outside_[slot] = members_[pos];
    members_[pos] = j;
    if (alpha_ != 0.0) refresh();
    return;
  }
  update_kernel<K>(inverse_.data(), k_, pos, kernel_(j, j), scratch_c_.data(),
                   scratch_w_.data(), scratch_m_.data());
  outside_[slot] = members_[pos];
  members_[pos] = j;
  // Fold the determinant ratio into the log lazily; one log per few hundred
  // accepts instead of one per accept.
  pending_ratio_ *= ratio;
  if (pending_ratio_ > 1e150 || pending_ratio_ < 1e-150) {
    log_det_ += std::log(pending_ratio_);
    pending_ratio_ = 1.0;
  }
}

template <int K>
bool ExchangeChain::step_fixed(Rng& rng) {
  // Both indices from one 64-bit draw by multiply-shift on each 32-bit half;
  // the bias is below n / 2^32, far under anything a test could see.
  const std::uint64_t bits = rng();
  const int pos = static_cast<int>(((bits & 0xffffffffULL) * static_cast<std::uint64_t>(k_)) >> 32);
  const int slot =
      static_cast<int>(((bits >> 32) * static_cast<std::uint64_t>(outside_.size())) >> 32);

  if (alpha_ == 0.0) {
    commit_swap<K>(pos, slot, 1.0);
    return true;
  }
  const int j = outside_[slot];
  double ratio;
  if (inverse_.size() == 0) {
    ratio = swap_ratio_naive(pos, j);
  } else {
    const double* col = kernel_.data() + static_cast<std::ptrdiff_t>(j) * n_;
    ratio = ratio_kernel<K>(col, members_.data(), inverse_.data(), k_, pos, col[j],
                            scratch_c_.data(), scratch_w_.data());
  }
  if (!(ratio > 0.0)) return false;
  if (ratio < 1.0) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double accept = alpha_ == 1.0 ? ratio : std::pow(ratio, alpha_);
    if (u >= accept) return false;
  }
  commit_swap<K>(pos, slot, ratio);
  return true;
}

bool ExchangeChain::step(Rng& rng) {
  if (k_ == 0 || outside_.empty()) return false;
  return step_fixed<0>(rng);
}

void ExchangeChain::run(long n_steps, Rng& rng) {
  if (k_ == 0 || outside_.empty()) return;
  auto loop = [&]<int K>() {
    for (long t = 0; t < n_steps; ++t) step_fixed<K>(rng);
  };
  switch (k_) {
    case 1: loop.template operator()<1>(); break;
    case 2: loop.template operator()<2>(); break;
    case 3: loop.template operator()<3>(); break;
    case 4: loop.template operator()<4>(); break;
    case 5: loop.template operator()<5>(); break;
    default: loop.template operator()<0>(); break;
  }
}

Subset sample_mcmc(const DppDistribution& dist, const McmcConfig& cfg) {
  if (cfg.n_steps < 1) throw ParameterError("n_steps must be >= 1");
  const int n = dist.ground_size();
  const int k = dist.k;
  Rng rng(cfg.seed);

  auto random_start = [&] {
    std::vector<int> all(n);
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(k);
    return Subset(std::move(all));
  };

  Subset start;
  if (cfg.init == McmcInit::greedy_mode && k > 0) {
    try {
      start = greedy_mode(dist.kernel, k).subset;
    } catch (const DegenerateError&) {
      if (dist.alpha > 0.0) {
        throw InitializationError("greedy initialisation failed: kernel rank is below k");
      }
      start = random_start();
    }
  } else {
    start = random_start();
  }

  if (dist.alpha > 0.0 && k > 0 &&
      log_det_psd(principal_submatrix(dist.kernel, start.indices())) == kNegInf) {
    // Random swaps until the start set has positive determinant.
    std::vector<int> cur(start.begin(), start.end());
    std::vector<int> out = complement(start, n);
    std::uniform_int_distribution<int> pick_in(0, k - 1);
    bool found = false;
    const long attempts = static_cast<long>(n) * k;
    for (long t = 0; t < attempts && !found && !out.empty(); ++t) {
      std::uniform_int_distribution<int> pick_out(0, static_cast<int>(out.size()) - 1);
      const int p = pick_in(rng);
      const int s = pick_out(rng);
      std::swap(cur[p], out[s]);
      found = log_det_psd(principal_submatrix(dist.kernel, cur)) != kNegInf;
    }
    if (!found) throw InitializationError("no start set with positive determinant found");
    start = Subset(cur);
  }

  ExchangeChain chain(dist.kernel, dist.alpha, start);
  chain.run(cfg.n_steps, rng);
  return chain.state();
}

double total_variation(const std::map<Subset, double>& p, const std::map<Subset, double>& q) {
  double acc = 0.0;
  for (const auto& [s, pv] : p) {
    auto it = q.find(s);
    acc += std::abs(pv - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [s, qv] : q) {
    if (!p.contains(s)) acc += qv;
  }
  return 0.5 * acc;
}

}  // namespace dppal
