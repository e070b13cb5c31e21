#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace forgeline::drl {

using Rng = std::mt19937_64;

struct MlpShape {
  std::size_t input = 0;
  std::size_t hidden1 = 0;
  std::size_t hidden2 = 0;
  std::size_t output = 0;

  bool operator==(const MlpShape&) const = default;
};

/// Intermediate activations kept for backpropagation. Columns are samples.
struct ForwardCache {
  Eigen::MatrixXd input;
  Eigen::MatrixXd pre1, hidden1;
  Eigen::MatrixXd pre2, hidden2;
  Eigen::MatrixXd output;
};

struct MlpGradients {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  MlpGradients& operator+=(const MlpGradients& other);
  MlpGradients& operator*=(double factor);
  std::vector<double> flatten() const;
};

/// Two rectified hidden layers and a linear output layer:
/// h1 = relu(W1 x + b1), h2 = relu(W2 h1 + b2), y = W3 h2 + b3.
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(MlpShape shape);  // zero parameters

  /// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weights and biases.
  static Mlp random(MlpShape shape, Rng& rng);

  const MlpShape& shape() const { return shape_; }

  Eigen::VectorXd forward(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd forward_batch(const Eigen::MatrixXd& x) const;
  ForwardCache forward_cached(const Eigen::MatrixXd& x) const;

  /// Gradients of sum_j upstream(:, j) . y(:, j) with respect to every parameter.
  MlpGradients backward(const ForwardCache& cache, const Eigen::MatrixXd& upstream) const;

  /// theta <- theta - learning_rate * grad.
  void apply_gradients(const MlpGradients& grads, double learning_rate);

  std::size_t parameter_count() const;
  /// Order: W1 (row-major), b1, W2, b2, W3, b3.
  std::vector<double> flatten() const;
  void unflatten(std::span<const double> params);
  bool all_finite() const;

  bool operator==(const Mlp& other) const;

  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

 private:
  MlpShape shape_;
};

}  // namespace forgeline::drl
