#include "dppal/mode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "dppal/errors.hpp"
#include "dppal/kernel.hpp"

namespace dppal {

namespace {

using Rng = std::mt19937_64;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxEnumeration = 1e6;

// Work cap (subset-visits) for one exact_relaxation call.
constexpr double kExactWorkBudget = 4e8;

// Smallest problem for which SMD evaluates log g only at checkpoints.
constexpr Eigen::Index kDenseEvalLimit = 12;

// 200 N / k iterations, but never fewer than 2000: each iteration moves v by
// about eta / (1 + eta) of a full fixed-point step, and small problems with
// optima on the boundary need a couple of hundred such steps.
long default_smd_iterations(Eigen::Index n, int k) {
  return std::max<long>(2000, 200 * static_cast<long>(n) / k);
}

void check_square(const Matrix& l) {
  if (l.rows() != l.cols()) throw InputError("kernel matrix must be square");
  if (!l.allFinite()) throw InputError("kernel matrix contains non-finite values");
}

void check_weights(const Matrix& l, const Vector& v) {
  if (v.size() != l.rows()) throw InputError("weight vector length does not match kernel");
  if (!v.allFinite() || (v.array() < 0.0).any()) {
    throw InputError("weights must be finite and nonnegative");
  }
}

Eigen::Index argmax_lowest(const Vector& x) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < x.size(); ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

// All size-k subsets with positive determinant, flattened.
struct Enumeration {
  int k = 0;
  std::vector<int> items;  // subset s occupies items[s*k .. s*k+k)
  std::vector<double> log_det;

  std::size_t count() const { return log_det.size(); }
};

Enumeration enumerate(const Matrix& l, int k) {
  const int n = static_cast<int>(l.rows());
  if (binomial(n, k) > kMaxEnumeration) throw CapacityError("too many subsets to enumerate");
  Enumeration e;
  e.k = k;
  for_each_combination(n, k, [&](std::span<const int> c) {
    const double ld = log_det_psd(principal_submatrix(l, c));
    if (ld == kNegInf) return;
    e.items.insert(e.items.end(), c.begin(), c.end());
    e.log_det.push_back(ld);
  });
  return e;
}

// log g(v) and the marginal vector p under P(A) ~ det(L_A) prod v.
double enumerated_marginals(const Enumeration& e, const Vector& v, Vector* p) {
  const Vector logv = v.array().log().matrix();
  std::vector<double> lw(e.count());
  double hi = kNegInf;
  for (std::size_t s = 0; s < e.count(); ++s) {
    double acc = e.log_det[s];
    for (int r = 0; r < e.k; ++r) acc += logv[e.items[s * e.k + r]];
    lw[s] = acc;
    hi = std::max(hi, acc);
  }
  if (p) p->setZero(v.size());
  if (hi == kNegInf) return kNegInf;
  double z = 0.0;
  for (std::size_t s = 0; s < e.count(); ++s) {
    const double w = std::exp(lw[s] - hi);
    z += w;
    if (p) {
      for (int r = 0; r < e.k; ++r) (*p)[e.items[s * e.k + r]] += w;
    }
  }
  if (p) *p /= z;
  return hi + std::log(z);
}

Matrix weighted_kernel(const Matrix& l, const Vector& v) {
  const Vector s = v.cwiseSqrt();
  return s.asDiagonal() * l * s.asDiagonal();
}

Vector spectral_marginals(const Matrix& l, int k, const Vector& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(weighted_kernel(l, v));
  const Eigen::Index n = l.rows();
  std::vector<double> lam(n);
  for (Eigen::Index i = 0; i < n; ++i) lam[i] = std::max(0.0, es.eigenvalues()[i]);
  const double log_ek = log_elementary_symmetric(lam, k)[k];
  if (log_ek == kNegInf) throw DegenerateError("generating polynomial vanishes");

  Vector weight(n);
  std::vector<double> others;
  others.reserve(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    if (lam[m] <= 0.0) {
      weight[m] = 0.0;
      continue;
    }
    others.assign(lam.begin(), lam.end());
    others.erase(others.begin() + m);
    const double le = log_elementary_symmetric(others, k - 1)[k - 1];
    weight[m] = le == kNegInf ? 0.0 : std::exp(std::log(lam[m]) + le - log_ek);
  }
  return es.eigenvectors().cwiseAbs2() * weight;
}

// One heat-bath exchange move targeting P(A) ~ det(L_A) prod v: drop a
// uniform member, re-add j with probability ~ v_j det(L_{A-i+j}). Fills
// `probs` with the re-add distribution and moves `members`.
void heat_bath_step(const Matrix& l, const Vector& v, std::vector<int>& members, Rng& rng,
                    Vector& probs) {
  const int k = static_cast<int>(members.size());
  const Eigen::Index n = l.rows();
  std::uniform_int_distribution<int> pick(0, k - 1);
  const int pos = pick(rng);

  std::vector<int> rest;
  rest.reserve(k - 1);
  for (int r = 0; r < k; ++r) {
    if (r != pos) rest.push_back(members[r]);
  }

  Vector schur = l.diagonal();
  if (!rest.empty()) {
    const Matrix lrr = principal_submatrix(l, rest);
    Eigen::LLT<Matrix> llt(lrr);
    if (llt.info() != Eigen::Success) throw DegenerateError("chain state has zero determinant");
    Matrix cols(n, rest.size());
    for (std::size_t c = 0; c < rest.size(); ++c) cols.col(c) = l.col(rest[c]);
    const Matrix y = llt.matrixL().solve(cols.transpose());
    schur -= y.colwise().squaredNorm().transpose();
  }

  probs = v.cwiseProduct(schur.cwiseMax(0.0));
  for (int r : rest) probs[r] = 0.0;
  const double z = probs.sum();
  if (!(z > 0.0) || !std::isfinite(z)) throw DegenerateError("no admissible exchange move");
  probs /= z;

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  Eigen::Index j = n - 1;
  for (Eigen::Index c = 0; c < n; ++c) {
    u -= probs[c];
    if (u < 0.0 && probs[c] > 0.0) {
      j = c;
      break;
    }
  }
  while (probs[j] <= 0.0 && j > 0) --j;
  members[pos] = static_cast<int>(j);
}


// Heat-bath move as above that also returns the transition vector averaged
// over the dropped member: x_j = sum_i P(add j | A - i). With M = L_A^-1,
// the Schur complement of j given A - i is (L_jj - q_j) + (M L_Aj)_i^2 / M_ii
// where q_j = L_jA M L_Aj; both terms are nonnegative.
void averaged_heat_bath_step(const Matrix& l, const Vector& v, std::vector<int>& members, Rng& rng,
                             Vector& x) {
  const int k = static_cast<int>(members.size());
  const Eigen::Index n = l.rows();
  Matrix rows(k, n);
  for (int r = 0; r < k; ++r) rows.row(r) = l.row(members[r]);
  Eigen::LLT<Matrix> llt(principal_submatrix(l, members));
  if (llt.info() != Eigen::Success) throw DegenerateError("chain state has zero determinant");
  const Matrix w = llt.solve(rows);
  const Vector inv_diag = llt.solve(Matrix::Identity(k, k)).diagonal();
  const Vector base = (l.diagonal() - rows.cwiseProduct(w).colwise().sum().transpose()).cwiseMax(0.0);

  std::uniform_int_distribution<int> pick(0, k - 1);
  const int pos = pick(rng);
  x.setZero(n);
  Vector move;
  for (int i = 0; i < k; ++i) {
    Vector probs = v.cwiseProduct(base + w.row(i).transpose().cwiseAbs2() / inv_diag[i]);
    for (int r = 0; r < k; ++r) {
      if (r != i) probs[members[r]] = 0.0;
    }
    const double z = probs.sum();
    if (!(z > 0.0) || !std::isfinite(z)) throw DegenerateError("no admissible exchange move");
    probs /= z;
    x += probs;
    if (i == pos) move = std::move(probs);
  }

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  Eigen::Index j = n - 1;
  for (Eigen::Index c = 0; c < n; ++c) {
    u -= move[c];
    if (u < 0.0 && move[c] > 0.0) {
      j = c;
      break;
    }
  }
  while (move[j] <= 0.0 && j > 0) --j;
  members[pos] = static_cast<int>(j);
}

}  // namespace

RelaxationPoint::RelaxationPoint(Vector v, int k) : v_(std::move(v)), k_(k) {
  if (k < 0) throw ParameterError("k must be >= 0");
  if (!v_.allFinite() || (v_.array() < 0.0).any()) {
    throw InputError("relaxation point must be finite and nonnegative");
  }
  if (std::abs(v_.sum() - k) > 1e-9 * std::max(1, k)) {
    throw InputError("relaxation point must sum to k");
  }
}

RelaxationPoint RelaxationPoint::uniform(Eigen::Index n, int k) {
  return RelaxationPoint(Vector::Constant(n, static_cast<double>(k) / n), k);
}

std::string to_string(ModeAlgorithm a) { return a == ModeAlgorithm::greedy ? "greedy" : "mcr"; }

double generating_polynomial(const Matrix& l, int k, const Vector& v) {
  check_square(l);
  check_weights(l, v);
  if (k < 0 || k > l.rows()) throw ParameterError("k must lie in [0, N]");
  Eigen::SelfAdjointEigenSolver<Matrix> es(weighted_kernel(l, v), Eigen::EigenvaluesOnly);
  std::vector<double> lam(es.eigenvalues().data(), es.eigenvalues().data() + l.rows());
  return log_elementary_symmetric(lam, k)[k];
}

Vector dpp_marginals(const Matrix& l, int k, const Vector& v) {
  check_square(l);
  check_weights(l, v);
  if (k < 1 || k > l.rows()) throw ParameterError("k must lie in [1, N]");
  if (binomial(static_cast<int>(l.rows()), k) <= kMaxEnumeration) {
    Vector p;
    if (enumerated_marginals(enumerate(l, k), v, &p) == kNegInf) {
      throw DegenerateError("generating polynomial vanishes");
    }
    return p;
  }
  return spectral_marginals(l, k, v);
}

ModeResult greedy_mode(const Matrix& l, int k) {
  check_square(l);
  const Eigen::Index n = l.rows();
  if (k < 0 || k > n) throw ParameterError("k must lie in [0, N]");

  ModeResult res;
  res.algorithm = ModeAlgorithm::greedy;
  if (k == 0) return res;

  Vector gain = l.diagonal();
  const double floor = 1e-12 * std::max(gain.maxCoeff(), std::numeric_limits<double>::min());
  Matrix rows(k, n);
  std::vector<char> taken(n, 0);
  std::vector<int> chosen;
  double log_det = 0.0;

  for (int m = 0; m < k; ++m) {
    Eigen::Index best = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (taken[j]) continue;
      if (best < 0 || gain[j] > gain[best]) best = j;
    }
    if (best < 0 || !(gain[best] > floor)) {
      throw DegenerateError("greedy mode: remaining gains are zero after " + std::to_string(m) +
                            " of " + std::to_string(k) + " items (rank deficiency)");
    }
    const double g = gain[best];
    log_det += std::log(g);
    taken[best] = 1;
    chosen.push_back(static_cast<int>(best));

    Eigen::RowVectorXd e = l.row(best);
    if (m > 0) e.noalias() -= rows.col(best).head(m).transpose() * rows.topRows(m);
    e /= std::sqrt(g);
    rows.row(m) = e;
    gain -= e.transpose().cwiseAbs2();
  }
  res.subset = Subset(std::move(chosen));
  res.log_det = log_det;
  res.iterations = k;
  return res;
}

Vector transition_gradient(const Matrix& l, int k, const Vector& v, const Subset& a,
                           std::uint64_t seed) {
  check_square(l);
  check_weights(l, v);
  if (static_cast<int>(a.size()) != k || k < 1) throw InputError("subset size must equal k >= 1");
  a.check_bounds(static_cast<int>(l.rows()));
  Rng rng(seed);
  std::vector<int> members(a.begin(), a.end());
  Vector probs;
  heat_bath_step(l, v, members, rng, probs);
  return static_cast<double>(k) * probs;
}

SmdResult smd_relaxation_detailed(const Matrix& l, int k, const SmdConfig& cfg) {
  check_square(l);
  const Eigen::Index n = l.rows();
  if (k < 1 || k > n) throw ParameterError("k must lie in [1, N]");
  if (!(cfg.step_size > 0.0)) throw ParameterError("step size must be positive");
  if (cfg.n_iters < 0) throw ParameterError("n_iters must be >= 1 (0 selects the default)");
  const long iters = cfg.n_iters > 0 ? cfg.n_iters : default_smd_iterations(n, k);

  Vector v = cfg.initial_point.size() == n ? cfg.initial_point
                                           : Vector::Constant(n, static_cast<double>(k) / n);
  v *= k / v.sum();

  Rng rng(cfg.seed);
  std::vector<int> members = greedy_mode(l, k).subset.vector();

  const long burn_in = std::max<long>(cfg.indicator_warmup, iters / 4);
  Vector avg_sum = Vector::Zero(n);
  long avg_count = 0;

  Vector best = v;
  double best_log_g = generating_polynomial(l, k, v);
  auto consider = [&](const Vector& cand) {
    const double lg = generating_polynomial(l, k, cand);
    if (lg > best_log_g) {
      best_log_g = lg;
      best = cand;
    }
  };
  auto checkpoint = [&](long t) {
    if (n <= kDenseEvalLimit) return true;
    return t == iters || t == (iters + 1) / 2 || t == (3 * iters + 3) / 4;
  };

  Vector probs;
  Vector x(n);
  for (long t = 1; t <= iters; ++t) {
    const bool indicator = t <= cfg.indicator_warmup || cfg.variant == GradientVariant::indicator;
    if (indicator) {
      heat_bath_step(l, v, members, rng, probs);
      x.setZero();
      for (int m : members) x[m] = 1.0;
    } else if (cfg.variant == GradientVariant::transition) {
      heat_bath_step(l, v, members, rng, probs);
      x = static_cast<double>(k) * probs;
    } else {
      averaged_heat_bath_step(l, v, members, rng, x);
    }
    const Vector u = v + cfg.step_size * x;
    v = (static_cast<double>(k) / u.sum()) * u;
    if (!v.allFinite()) throw DivergenceError("mirror descent iterate became non-finite", t);

    if (t > burn_in) {
      avg_sum += v;
      ++avg_count;
    }
    if (checkpoint(t)) {
      consider(v);
      if (avg_count > 0 && (t == iters || n > kDenseEvalLimit || t % 16 == 0)) {
        Vector avg = avg_sum / static_cast<double>(avg_count);
        avg *= k / avg.sum();
        consider(avg);
      }
    }
  }
  best *= k / best.sum();
  Vector tail = avg_count > 0 ? Vector(avg_sum * (k / avg_sum.sum())) : v;
  return SmdResult{RelaxationPoint(best, k), best_log_g, iters, v, std::move(tail)};
}

RelaxationPoint smd_relaxation(const Matrix& l, int k, const SmdConfig& cfg) {
  return smd_relaxation_detailed(l, k, cfg).point;
}

SmdResult exact_relaxation(const Matrix& l, int k, const ExactRelaxationConfig& cfg,
                           const Vector& initial_point) {
  check_square(l);
  const Eigen::Index n = l.rows();
  if (k < 1 || k > n) throw ParameterError("k must lie in [1, N]");
  const Enumeration e = enumerate(l, k);
  if (e.count() == 0) throw DegenerateError("every size-k subset has zero determinant");

  const long budget = static_cast<long>(kExactWorkBudget / (static_cast<double>(e.count()) * k));
  const long max_iters = std::max<long>(200, std::min(cfg.max_iters, budget));

  Vector v = initial_point.size() == n && (initial_point.array() > 0.0).any()
                 ? initial_point
                 : Vector::Constant(n, static_cast<double>(k) / n);
  v *= k / v.sum();
  Vector p;
  double lg = enumerated_marginals(e, v, &p);
  if (lg == kNegInf) {
    v = Vector::Constant(n, static_cast<double>(k) / n);
    lg = enumerated_marginals(e, v, &p);
  }

  // Multiplicative steps v <- v * r^tau with r = grad log g; tau = 1 is the
  // monotone fixed-point step, larger tau is tried and kept while it helps.
  double tau = 1.25;
  long cooldown = 0;
  long it = 0;
  Vector trial_p;
  for (; it < max_iters; ++it) {
    Vector r = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (v[i] > 0.0) r[i] = p[i] / v[i];
    }
    if (r.maxCoeff() <= 1.0 + cfg.tol) break;

    if (cooldown == 0) {
      Vector trial = v.cwiseProduct(r.array().pow(tau).matrix());
      trial *= k / trial.sum();
      const double tlg = enumerated_marginals(e, trial, &trial_p);
      if (tlg >= lg) {
        v = trial;
        p = trial_p;
        lg = tlg;
        tau = std::min(tau * 1.25, 16.0);
        continue;
      }
      tau = 1.25;
      cooldown = 8;
    } else {
      --cooldown;
    }
    v = p * (k / p.sum());
    lg = enumerated_marginals(e, v, &p);
  }
  return SmdResult{RelaxationPoint(v, k), lg, it, {}, {}};
}

ModeResult mcr_mode(const Matrix& l, int k, const McrConfig& cfg) {
  check_square(l);
  const int n = static_cast<int>(l.rows());
  if (k < 0 || k > n) throw ParameterError("k must lie in [0, N]");

  ModeResult res;
  res.algorithm = ModeAlgorithm::mcr;
  if (k == 0) return res;

  Matrix current = l;
  std::vector<int> map(n);
  std::iota(map.begin(), map.end(), 0);
  std::vector<int> chosen;
  Vector warm;

  for (int level = k; level >= 1; --level) {
    const int n_cur = static_cast<int>(current.rows());
    Eigen::Index pick = 0;
    if (level == 1) {
      pick = argmax_lowest(current.diagonal());
    } else {
      SmdResult sol = binomial(n_cur, level) <= cfg.exact_threshold
                          ? exact_relaxation(current, level, {}, warm)
                          : [&] {
                              SmdConfig c = cfg.smd;
                              c.seed = cfg.smd.seed + 0x9e3779b97f4a7c15ULL * level;
                              c.initial_point = warm;
                              return smd_relaxation_detailed(current, level, c);
                            }();
      pick = argmax_lowest(sol.point.values());
      res.iterations += sol.iterations;
      if (cfg.warm_start) {
        Vector rest(n_cur - 1);
        for (Eigen::Index i = 0, d = 0; i < n_cur; ++i) {
          if (i != pick) rest[d++] = sol.point.values()[i];
        }
        // Blend with uniform so no coordinate starts at exactly zero.
        if (rest.sum() > 0.0) {
          warm = 0.9 * rest * ((level - 1) / rest.sum()) +
                 Vector::Constant(n_cur - 1, 0.1 * (level - 1) / (n_cur - 1));
        }
      }
    }
    if (!(current(pick, pick) > 0.0)) {
      throw DegenerateError("maximum coordinate rounding reached a zero-probability item");
    }
    chosen.push_back(map[pick]);
    if (level > 1) {
      std::vector<int> rest;
      current = condition_matrix(current, Subset{static_cast<int>(pick)}, &rest);
      std::vector<int> next_map(rest.size());
      for (std::size_t r = 0; r < rest.size(); ++r) next_map[r] = map[rest[r]];
      map = std::move(next_map);
    }
  }
  res.subset = Subset(std::move(chosen));
  res.log_det = log_det_psd(principal_submatrix(l, res.subset.indices()));
  if (res.log_det == kNegInf) throw DegenerateError("rounded subset has zero determinant");
  return res;
}

}  // namespace dppal
