#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dppal/linalg.hpp"

namespace dppal {

// Layer widths from input to output. Hidden layers use the logistic
// sigmoid, the output layer a softmax over the classes.
struct MlpSpec {
  std::vector<int> layer_sizes;

  void validate() const;
  int input_dim() const { return layer_sizes.front(); }
  int classes() const { return layer_sizes.back(); }
};

enum class Optimizer { lbfgs, gradient_descent };
std::string to_string(Optimizer o);
// ConfigError unless `name` is "lbfgs" or "gd".
Optimizer parse_optimizer(const std::string& name);

struct TrainConfig {
  // Plain gradient descent at this rate stalls on the sigmoid plateau for
  // the sine task, so L-BFGS is the default; `epochs` caps the iterations of
  // either optimizer and `learning_rate` only affects gradient descent.
  Optimizer optimizer = Optimizer::lbfgs;
  double learning_rate = 0.5;
  int epochs = 500;
  int members = 10;
  bool bootstrap = true;
};

class Mlp {
 public:
  // Xavier-uniform weights, zero biases.
  Mlp(const MlpSpec& spec, std::uint64_t seed);

  const MlpSpec& spec() const { return spec_; }

  // Row-wise class probabilities for the rows of `x`.
  Matrix predict_proba(const Matrix& x) const;

  // Mean cross-entropy over the rows and its gradient with respect to every
  // parameter, flattened in parameter_count() order.
  double loss(const Matrix& x, std::span<const int> labels) const;
  double loss_and_gradient(const Matrix& x, std::span<const int> labels, Vector& grad) const;

  // One full-batch gradient step; returns the loss before the step.
  double train_step(const Matrix& x, std::span<const int> labels, double learning_rate);

  // Full-batch training from the current weights. Returns the loss before
  // the first iteration followed by the loss after each iteration.
  std::vector<double> fit(const Matrix& x, std::span<const int> labels, const TrainConfig& cfg);

  Eigen::Index parameter_count() const;
  Vector parameters() const;
  void set_parameters(const Vector& theta);

 private:
  MlpSpec spec_;
  std::vector<Matrix> weights_;  // layer l: out x in
  std::vector<Vector> biases_;
};

class Ensemble {
 public:
  Ensemble(MlpSpec spec, std::vector<Mlp> members, std::vector<std::uint64_t> seeds,
           bool degenerate_labels);

  const MlpSpec& spec() const { return spec_; }
  const std::vector<Mlp>& members() const { return members_; }
  const std::vector<std::uint64_t>& seeds() const { return seeds_; }
  // True when the training labels held a single class.
  bool degenerate_labels() const { return degenerate_labels_; }

 private:
  MlpSpec spec_;
  std::vector<Mlp> members_;
  std::vector<std::uint64_t> seeds_;
  bool degenerate_labels_;
};

// Members differ by initial weights and by a bootstrap resample of the
// training rows. Deterministic in `seed`.
Ensemble train_ensemble(const MlpSpec& spec, const Matrix& features, std::span<const int> labels,
                        const TrainConfig& cfg, std::uint64_t seed);

// Mean of the member softmax outputs.
Matrix predict_proba(const Ensemble& ens, const Matrix& features);

// Row entropies -sum p ln p with 0 ln 0 = 0.
Vector row_entropy(const Matrix& probs);

// Entropy of the ensemble-mean probabilities, one value per row.
Vector uncertainty(const Ensemble& ens, const Matrix& features);

// Index of the largest probability per row (lowest index on ties).
std::vector<int> predict_labels(const Ensemble& ens, const Matrix& features);

double accuracy(std::span<const int> predicted, std::span<const int> truth);

}  // namespace dppal
