#include "dppal/learner.hpp"

#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>
#include <glog/logging.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>

#include "dppal/errors.hpp"

namespace dppal {

namespace {

using Rng = std::mt19937_64;

Matrix sigmoid(const Matrix& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

// Numerically stable row softmax.
Matrix softmax_rows(const Matrix& z) {
  Matrix out = z;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    const double hi = z.row(r).maxCoeff();
    out.row(r) = (z.row(r).array() - hi).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

void check_rows(const MlpSpec& spec, const Matrix& x) {
  if (x.cols() != spec.input_dim()) {
    throw InputError("feature dimension " + std::to_string(x.cols()) +
                     " does not match network input " + std::to_string(spec.input_dim()));
  }
}

void check_labels(const MlpSpec& spec, const Matrix& x, std::span<const int> labels) {
  check_rows(spec, x);
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw InputError("label count does not match feature rows");
  }
  for (int y : labels) {
    if (y < 0 || y >= spec.classes()) throw InputError("label outside [0, C)");
  }
}

}  // namespace

void MlpSpec::validate() const {
  if (layer_sizes.size() < 2) throw ParameterError("network needs at least input and output layers");
  for (int s : layer_sizes) {
    if (s < 1) throw ParameterError("layer sizes must be positive");
  }
}

Mlp::Mlp(const MlpSpec& spec, std::uint64_t seed) : spec_(spec) {
  spec_.validate();
  Rng rng(seed);
  const std::size_t layers = spec_.layer_sizes.size() - 1;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = spec_.layer_sizes[l];
    const int out = spec_.layer_sizes[l + 1];
    const double limit = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> unif(-limit, limit);
    Matrix w(out, in);
    for (int i = 0; i < out; ++i)
      for (int j = 0; j < in; ++j) w(i, j) = unif(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(Vector::Zero(out));
  }
}

Matrix Mlp::predict_proba(const Matrix& x) const {
  check_rows(spec_, x);
  Matrix a = x;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = a * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    a = l + 1 == weights_.size() ? softmax_rows(z) : sigmoid(z);
  }
  return a;
}

double Mlp::loss(const Matrix& x, std::span<const int> labels) const {
  check_labels(spec_, x, labels);
  const Matrix p = predict_proba(x);
  double acc = 0.0;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    acc -= std::log(std::max(p(r, labels[r]), std::numeric_limits<double>::min()));
  }
  return acc / static_cast<double>(x.rows());
}

double Mlp::loss_and_gradient(const Matrix& x, std::span<const int> labels, Vector& grad) const {
  check_labels(spec_, x, labels);
  const std::size_t layers = weights_.size();
  const double n = static_cast<double>(x.rows());

  std::vector<Matrix> acts;
  acts.reserve(layers + 1);
  acts.push_back(x);
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = acts.back() * weights_[l].transpose();
    z.rowwise() += biases_[l].transpose();
    acts.push_back(l + 1 == layers ? softmax_rows(z) : sigmoid(z));
  }

  const Matrix& p = acts.back();
  double loss_value = 0.0;
  Matrix delta = p;  // d loss / d logits, times n
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    loss_value -= std::log(std::max(p(r, labels[r]), std::numeric_limits<double>::min()));
    delta(r, labels[r]) -= 1.0;
  }
  delta /= n;

  grad.resize(parameter_count());
  std::vector<Matrix> dw(layers);
  std::vector<Vector> db(layers);
  for (std::size_t l = layers; l-- > 0;) {
    dw[l] = delta.transpose() * acts[l];
    db[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      const Matrix& h = acts[l];
      delta = (delta * weights_[l]).cwiseProduct(h.cwiseProduct((1.0 - h.array()).matrix()));
    }
  }
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    grad.segment(off, dw[l].size()) = dw[l].reshaped();
    off += dw[l].size();
    grad.segment(off, db[l].size()) = db[l];
    off += db[l].size();
  }
  return loss_value / n;
}

double Mlp::train_step(const Matrix& x, std::span<const int> labels, double learning_rate) {
  Vector grad;
  const double before = loss_and_gradient(x, labels, grad);
  set_parameters(parameters() - learning_rate * grad);
  return before;
}

namespace {

// Mean cross-entropy of a copy of the network as a function of its flattened
// parameters.
class CrossEntropyObjective final : public ceres::FirstOrderFunction {
 public:
  CrossEntropyObjective(const Mlp& net, const Matrix& x, std::span<const int> labels)
      : net_(net), x_(x), labels_(labels) {}

  bool Evaluate(const double* params, double* cost, double* gradient) const override {
    net_.set_parameters(Eigen::Map<const Vector>(params, NumParameters()));
    if (gradient == nullptr) {
      *cost = net_.loss(x_, labels_);
    } else {
      *cost = net_.loss_and_gradient(x_, labels_, grad_);
      Eigen::Map<Vector>(gradient, NumParameters()) = grad_;
    }
    return std::isfinite(*cost);
  }
  int NumParameters() const override { return static_cast<int>(net_.parameter_count()); }

 private:
  mutable Mlp net_;
  const Matrix& x_;
  std::span<const int> labels_;
  mutable Vector grad_;
};

}  // namespace

std::string to_string(Optimizer o) { return o == Optimizer::lbfgs ? "lbfgs" : "gd"; }

Optimizer parse_optimizer(const std::string& name) {
  if (name == "lbfgs") return Optimizer::lbfgs;
  if (name == "gd") return Optimizer::gradient_descent;
  throw ConfigError("optimizer must be 'lbfgs' or 'gd', got '" + name + "'");
}

std::vector<double> Mlp::fit(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg) {
  check_labels(spec_, x, labels);
  if (cfg.epochs < 0) throw ParameterError("epochs must be >= 0");
  std::vector<double> trace{loss(x, labels)};
  if (cfg.epochs == 0) return trace;

  if (cfg.optimizer == Optimizer::gradient_descent) {
    if (!(cfg.learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
    for (int e = 0; e < cfg.epochs; ++e) {
      train_step(x, labels, cfg.learning_rate);
      trace.push_back(loss(x, labels));
    }
    return trace;
  }

  // Ceres reports recoverable line-search trouble through glog warnings,
  // which the restart loop below already handles. Raised once; a host that
  // wants them can lower the flag again after the first fit.
  static std::once_flag quiet_glog;
  std::call_once(quiet_glog, [] { FLAGS_minloglevel = std::max<int>(FLAGS_minloglevel, google::GLOG_ERROR); });

  // Single-threaded and with a Wolfe line search, so runs are reproducible
  // and every accepted iteration lowers the loss.
  ceres::GradientProblemSolver::Options options;
  options.line_search_direction_type = ceres::LBFGS;
  options.function_tolerance = 1e-12;
  options.gradient_tolerance = 1e-10;
  options.parameter_tolerance = 1e-12;
  options.line_search_interpolation_type = ceres::BISECTION;
  options.logging_type = ceres::SILENT;
  ceres::GradientProblem problem(new CrossEntropyObjective(*this, x, labels));
  Vector theta = parameters();
  int remaining = cfg.epochs;
  // An uphill L-BFGS direction ends a solve early; restarting from the
  // current weights drops the stale curvature pairs.
  for (int restart = 0; remaining > 0 && restart < 20; ++restart) {
    options.max_num_iterations = remaining;
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(options, problem, theta.data(), &summary);
    if (!std::isfinite(summary.final_cost)) {
      throw DivergenceError("classifier training diverged", cfg.epochs - remaining);
    }
    for (std::size_t i = 1; i < summary.iterations.size(); ++i) {
      trace.push_back(summary.iterations[i].cost);
    }
    const int used = std::max(1, static_cast<int>(summary.iterations.size()) - 1);
    remaining -= used;
    if (summary.termination_type != ceres::FAILURE) break;
  }
  set_parameters(theta);
  return trace;
}

Eigen::Index Mlp::parameter_count() const {
  Eigen::Index count = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) count += weights_[l].size() + biases_[l].size();
  return count;
}

Vector Mlp::parameters() const {
  Vector theta(parameter_count());
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    theta.segment(off, weights_[l].size()) = weights_[l].reshaped();
    off += weights_[l].size();
    theta.segment(off, biases_[l].size()) = biases_[l];
    off += biases_[l].size();
  }
  return theta;
}

void Mlp::set_parameters(const Vector& theta) {
  if (theta.size() != parameter_count()) throw InputError("parameter vector has the wrong length");
  Eigen::Index off = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    weights_[l].reshaped() = theta.segment(off, weights_[l].size());
    off += weights_[l].size();
    biases_[l] = theta.segment(off, biases_[l].size());
    off += biases_[l].size();
  }
}

Ensemble::Ensemble(MlpSpec spec, std::vector<Mlp> members, std::vector<std::uint64_t> seeds,
                   bool degenerate_labels)
    : spec_(std::move(spec)),
      members_(std::move(members)),
      seeds_(std::move(seeds)),
      degenerate_labels_(degenerate_labels) {
  if (members_.empty()) throw ParameterError("ensemble needs at least one member");
}

Ensemble train_ensemble(const MlpSpec& spec, const Matrix& features, std::span<const int> labels,
                        const TrainConfig& cfg, std::uint64_t seed) {
  spec.validate();
  check_labels(spec, features, labels);
  if (features.rows() < 1) throw InputError("need at least one labeled sample");
  if (cfg.members < 1) throw ParameterError("ensemble needs at least one member");
  if (cfg.epochs < 0) throw ParameterError("epochs must be >= 0");
  if (cfg.optimizer == Optimizer::gradient_descent && !(cfg.learning_rate > 0.0)) {
    throw ParameterError("learning rate must be positive");
  }

  const bool degenerate =
      std::all_of(labels.begin(), labels.end(), [&](int y) { return y == labels[0]; });
  if (degenerate && spec.classes() > 1) {
    spdlog::warn("training labels hold a single class; predictions will be near-constant");
  }

  const Eigen::Index n = features.rows();
  Rng seeder(seed);
  std::vector<Mlp> members;
  std::vector<std::uint64_t> seeds;
  for (int m = 0; m < cfg.members; ++m) {
    const std::uint64_t member_seed = seeder();
    seeds.push_back(member_seed);
    Rng rng(member_seed);
    Mlp net(spec, rng());

    Matrix x = features;
    std::vector<int> y(labels.begin(), labels.end());
    if (cfg.bootstrap && n > 1) {
      std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
      for (Eigen::Index r = 0; r < n; ++r) {
        const Eigen::Index src = pick(rng);
        x.row(r) = features.row(src);
        y[r] = labels[src];
      }
    }
    net.fit(x, y, cfg);
    members.push_back(std::move(net));
  }
  return Ensemble(spec, std::move(members), std::move(seeds), degenerate);
}

Matrix predict_proba(const Ensemble& ens, const Matrix& features) {
  check_rows(ens.spec(), features);
  Matrix mean = Matrix::Zero(features.rows(), ens.spec().classes());
  for (const Mlp& m : ens.members()) mean += m.predict_proba(features);
  return mean / static_cast<double>(ens.members().size());
}

Vector row_entropy(const Matrix& probs) {
  Vector h(probs.rows());
  for (Eigen::Index r = 0; r < probs.rows(); ++r) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      const double p = probs(r, c);
      if (p > 0.0) acc -= p * std::log(p);
    }
    h[r] = std::max(0.0, acc);
  }
  return h;
}

Vector uncertainty(const Ensemble& ens, const Matrix& features) {
  return row_entropy(predict_proba(ens, features));
}

std::vector<int> predict_labels(const Ensemble& ens, const Matrix& features) {
  const Matrix p = predict_proba(ens, features);
  std::vector<int> out(p.rows());
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < p.cols(); ++c)
      if (p(r, c) > p(r, best)) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw InputError("prediction and label counts differ");
  if (truth.empty()) throw InputError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

}  // namespace dppal
