#include "forgeline/drl/mlp.hpp"

#include <cmath>

#include "forgeline/common/error.hpp"

namespace forgeline::drl {

namespace {

void append(std::vector<double>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
  }
}

void append(std::vector<double>& out, const Eigen::VectorXd& v) {
  out.insert(out.end(), v.data(), v.data() + v.size());
}

std::size_t take(std::span<const double> src, std::size_t at, Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = src[at++];
  }
  return at;
}

std::size_t take(std::span<const double> src, std::size_t at, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = src[at++];
  return at;
}

}  // namespace

MlpGradients& MlpGradients::operator+=(const MlpGradients& o) {
  w1 += o.w1; w2 += o.w2; w3 += o.w3;
  b1 += o.b1; b2 += o.b2; b3 += o.b3;
  return *this;
}

MlpGradients& MlpGradients::operator*=(double f) {
  w1 *= f; w2 *= f; w3 *= f;
  b1 *= f; b2 *= f; b3 *= f;
  return *this;
}

std::vector<double> MlpGradients::flatten() const {
  std::vector<double> out;
  append(out, w1); append(out, b1);
  append(out, w2); append(out, b2);
  append(out, w3); append(out, b3);
  return out;
}

Mlp::Mlp(MlpShape shape) : shape_(shape) {
  const auto in = static_cast<Eigen::Index>(shape.input);
  const auto h1 = static_cast<Eigen::Index>(shape.hidden1);
  const auto h2 = static_cast<Eigen::Index>(shape.hidden2);
  const auto out = static_cast<Eigen::Index>(shape.output);
  if (in == 0 || h1 == 0 || h2 == 0 || out == 0) throw DimensionError("MLP layer sizes must be positive");
  w1 = Eigen::MatrixXd::Zero(h1, in);
  b1 = Eigen::VectorXd::Zero(h1);
  w2 = Eigen::MatrixXd::Zero(h2, h1);
  b2 = Eigen::VectorXd::Zero(h2);
  w3 = Eigen::MatrixXd::Zero(out, h2);
  b3 = Eigen::VectorXd::Zero(out);
}

Mlp Mlp::random(MlpShape shape, Rng& rng) {
  Mlp net(shape);
  auto fill = [&rng](Eigen::MatrixXd& w, Eigen::VectorXd& b, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = dist(rng);
    }
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = dist(rng);
  };
  fill(net.w1, net.b1, shape.input);
  fill(net.w2, net.b2, shape.hidden1);
  fill(net.w3, net.b3, shape.hidden2);
  return net;
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != shape_.input) {
    throw DimensionError("MLP expects " + std::to_string(shape_.input) + " inputs, got " +
                         std::to_string(x.size()));
  }
  const Eigen::VectorXd h1 = (w1 * x + b1).cwiseMax(0.0);
  const Eigen::VectorXd h2 = (w2 * h1 + b2).cwiseMax(0.0);
  return w3 * h2 + b3;
}

Eigen::MatrixXd Mlp::forward_batch(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != shape_.input) {
    throw DimensionError("MLP expects " + std::to_string(shape_.input) + " input rows, got " +
                         std::to_string(x.rows()));
  }
  Eigen::MatrixXd h1 = ((w1 * x).colwise() + b1).cwiseMax(0.0);
  Eigen::MatrixXd h2 = ((w2 * h1).colwise() + b2).cwiseMax(0.0);
  return (w3 * h2).colwise() + b3;
}

ForwardCache Mlp::forward_cached(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != shape_.input) {
    throw DimensionError("MLP expects " + std::to_string(shape_.input) + " input rows, got " +
                         std::to_string(x.rows()));
  }
  ForwardCache c;
  c.input = x;
  c.pre1 = (w1 * x).colwise() + b1;
  c.hidden1 = c.pre1.cwiseMax(0.0);
  c.pre2 = (w2 * c.hidden1).colwise() + b2;
  c.hidden2 = c.pre2.cwiseMax(0.0);
  c.output = (w3 * c.hidden2).colwise() + b3;
  return c;
}

MlpGradients Mlp::backward(const ForwardCache& c, const Eigen::MatrixXd& upstream) const {
  if (upstream.rows() != c.output.rows() || upstream.cols() != c.output.cols()) {
    throw DimensionError("upstream gradient shape does not match the forward output");
  }
  MlpGradients g;
  g.w3 = upstream * c.hidden2.transpose();
  g.b3 = upstream.rowwise().sum();
  const Eigen::MatrixXd d2 =
      (w3.transpose() * upstream).cwiseProduct((c.pre2.array() > 0.0).cast<double>().matrix());
  g.w2 = d2 * c.hidden1.transpose();
  g.b2 = d2.rowwise().sum();
  const Eigen::MatrixXd d1 =
      (w2.transpose() * d2).cwiseProduct((c.pre1.array() > 0.0).cast<double>().matrix());
  g.w1 = d1 * c.input.transpose();
  g.b1 = d1.rowwise().sum();
  return g;
}

void Mlp::apply_gradients(const MlpGradients& g, double lr) {
  w1 -= lr * g.w1; b1 -= lr * g.b1;
  w2 -= lr * g.w2; b2 -= lr * g.b2;
  w3 -= lr * g.w3; b3 -= lr * g.b3;
}

std::size_t Mlp::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + b3.size());
}

std::vector<double> Mlp::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  append(out, w1); append(out, b1);
  append(out, w2); append(out, b2);
  append(out, w3); append(out, b3);
  return out;
}

void Mlp::unflatten(std::span<const double> params) {
  if (params.size() != parameter_count()) {
    throw DimensionError("expected " + std::to_string(parameter_count()) + " parameters, got " +
                         std::to_string(params.size()));
  }
  std::size_t at = 0;
  at = take(params, at, w1); at = take(params, at, b1);
  at = take(params, at, w2); at = take(params, at, b2);
  at = take(params, at, w3); take(params, at, b3);
}

bool Mlp::all_finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() && w3.allFinite() &&
         b3.allFinite();
}

bool Mlp::operator==(const Mlp& o) const {
  return shape_ == o.shape_ && w1 == o.w1 && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 && w3 == o.w3 &&
         b3 == o.b3;
}

}  // namespace forgeline::drl
