// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/nn.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "agr/errors.hpp"
#include "agr/rng.hpp"

namespace agr::nn {

std::string_view activation_name(Activation a) {
  switch (a) {
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
    case Activation::kIdentity: return "identity";
  }
  return "unknown";
}

std::optional<Activation> parse_activation(std::string_view name) {
  for (const auto a : {Activation::kRelu, Activation::kTanh, Activation::kIdentity}) {
    if (activation_name(a) == name) return a;
  }
  return std::nullopt;
}

namespace {

void activate(std::span<double> x, Activation a) {
  switch (a) {
    case Activation::kRelu:
      for (auto& v : x) v = v > 0.0 ? v : 0.0;
      break;
    case Activation::kTanh:
      for (auto& v : x) v = std::tanh(v);
      break;
    case Activation::kIdentity:
      break;
  }
}

// Pre-activation x W^T + b for one layer.
Tensor affine(const Tensor& x, const DenseLayer& layer) {
  if (x.rank() != 2 || x.cols() != layer.in_features()) {
    throw ShapeError("layer expects " + std::to_string(layer.in_features()) +
                     " input features, got " + shape_string(x.shape()));
  }
  Tensor out = matmul_transposed(x, layer.weight);
  const std::size_t cols = out.cols();
  const auto b = layer.bias.data();
  auto d = out.mutable_data();
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += b[c];
  return out;
}

}  // namespace

Mlp::Mlp(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("an MLP needs at least one layer");
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const auto& l = layers_[i];
    if (l.weight.rank() != 2) throw ShapeError("layer weights must be rank 2");
    if (l.bias.size() != l.out_features()) {
      throw ShapeError("layer " + std::to_string(i) + " bias length does not match its outputs");
    }
    if (i > 0 && layers_[i - 1].out_features() != l.in_features()) {
      throw ShapeError("layer " + std::to_string(i) + " expects " +
                       std::to_string(l.in_features()) + " inputs but layer " +
                       std::to_string(i - 1) + " produces " +
                       std::to_string(layers_[i - 1].out_features()));
    }
  }
}

Mlp Mlp::init(std::span<const std::size_t> widths, Activation hidden, std::uint64_t seed) {
  if (widths.size() < 2) throw ShapeError("need at least input and output widths");
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    const std::size_t in = widths[i], out = widths[i + 1];
    const bool last = i + 2 == widths.size();
    const Activation act = last ? Activation::kIdentity : hidden;
    const double gain = act == Activation::kRelu ? 2.0 : 1.0;
    const double stddev = std::sqrt(gain / static_cast<double>(in));
    layers.push_back({rand_fill({out, in}, Normal{0.0, stddev}, derive_seed(seed, i)),
                      Tensor::zeros({out}), act});
  }
  return Mlp(std::move(layers));
}

std::size_t Mlp::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
  return n;
}

Tensor Mlp::forward(const Tensor& batch) {
  cache_valid_ = false;
  pre_.clear();
  post_.clear();
  input_ = batch;
  const Tensor* x = &input_;
  for (const auto& layer : layers_) {
    pre_.push_back(affine(*x, layer));
    Tensor out = pre_.back();
    activate(out.mutable_data(), layer.activation);
    post_.push_back(std::move(out));
    x = &post_.back();
  }
  cache_valid_ = true;
  return post_.back();
}

Tensor Mlp::predict(const Tensor& batch) const {
  Tensor x = batch;
  for (const auto& layer : layers_) {
    x = affine(x, layer);
    activate(x.mutable_data(), layer.activation);
  }
  return x;
}

std::vector<LayerGrads> Mlp::backward(const Tensor& loss_grad) {
  if (!cache_valid_) throw StateError("backward called without a matching forward");
  if (!loss_grad.same_shape(post_.back())) {
    throw ShapeError("loss gradient " + shape_string(loss_grad.shape()) +
                     " does not match logits " + shape_string(post_.back().shape()));
  }
  cache_valid_ = false;

  std::vector<LayerGrads> grads(layers_.size());
  Tensor upstream = loss_grad;
  for (std::size_t li = layers_.size(); li-- > 0;) {
    const auto& layer = layers_[li];
    // Through the activation; ReLU'(0) is taken as 0.
    auto du = upstream.mutable_data();
    const auto pre = pre_[li].data();
    const auto post = post_[li].data();
    switch (layer.activation) {
      case Activation::kRelu:
        for (std::size_t i = 0; i < du.size(); ++i)
          if (!(pre[i] > 0.0)) du[i] = 0.0;
        break;
      case Activation::kTanh:
        for (std::size_t i = 0; i < du.size(); ++i) du[i] *= 1.0 - post[i] * post[i];
        break;
      case Activation::kIdentity:
        break;
    }
    const Tensor& input = li == 0 ? input_ : post_[li - 1];
    grads[li].weight = matmul(transpose(upstream), input);

    std::vector<double> db(layer.out_features(), 0.0);
    const std::size_t cols = upstream.cols();
    for (std::size_t r = 0; r < upstream.rows(); ++r)
      for (std::size_t c = 0; c < cols; ++c) db[c] += du[r * cols + c];
    grads[li].bias = Tensor::vector(db);

    if (li > 0) upstream = matmul(upstream, layer.weight);
  }
  return grads;
}

LossAndGrad softmax_cross_entropy(const Tensor& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw ShapeError("logits must be [batch x classes]");
  const std::size_t batch = logits.rows(), classes = logits.cols();
  if (labels.size() != batch) {
    throw ShapeError("got " + std::to_string(labels.size()) + " labels for a batch of " +
                     std::to_string(batch));
  }
  std::vector<double> grad(batch * classes);
  double total = 0.0;
  const auto z = logits.data();
  const double inv_batch = 1.0 / static_cast<double>(batch);
  for (std::size_t r = 0; r < batch; ++r) {
    const int label = labels[r];
    if (label < 0 || static_cast<std::size_t>(label) >= classes) {
      throw ParameterError("label " + std::to_string(label) + " at row " + std::to_string(r) +
                           " outside [0, " + std::to_string(classes) + ")");
    }
    const double* row = z.data() + r * classes;
    const double peak = *std::max_element(row, row + classes);
    double denom = 0.0;
    for (std::size_t c = 0; c < classes; ++c) denom += std::exp(row[c] - peak);
    const double log_denom = std::log(denom);
    total += log_denom - (row[label] - peak);
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(row[c] - peak - log_denom);
      grad[r * classes + c] = (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_batch;
    }
  }
  return {total * inv_batch, Tensor::from(logits.shape(), std::move(grad))};
}

LossAndGrad mse_loss(const Tensor& pred, const Tensor& target) {
  if (!pred.same_shape(target)) {
    throw ShapeError("prediction " + shape_string(pred.shape()) + " and target " +
                     shape_string(target.shape()) + " differ");
  }
  const double inv_batch = 1.0 / static_cast<double>(pred.rows());
  std::vector<double> grad(pred.size());
  double total = 0.0;
  for (std::size_t i = 0; i < grad.size(); ++i) {
    const double d = pred[i] - target[i];
    total += d * d;
    grad[i] = d * inv_batch;
  }
  return {0.5 * total * inv_batch, Tensor::from(pred.shape(), std::move(grad))};
}

std::vector<int> argmax_rows(const Tensor& logits) {
  std::vector<int> out(logits.rows());
  const std::size_t cols = logits.cols();
  for (std::size_t r = 0; r < out.size(); ++r) {
    const double* row = logits.data().data() + r * cols;
    out[r] = static_cast<int>(std::max_element(row, row + cols) - row);
  }
  return out;
}

double accuracy(const Tensor& logits, std::span<const int> labels) {
  const auto predicted = argmax_rows(logits);
  if (predicted.size() != labels.size()) throw ShapeError("label count mismatch");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hits += predicted[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

namespace {

Eigen::MatrixXd to_eigen(const Tensor& m) {
  if (m.rank() != 2) throw ShapeError("expected a matrix, got " + shape_string(m.shape()));
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = m.at(r, c);
  return out;
}

}  // namespace

double min_eigenvalue(const Tensor& symmetric) {
  const Eigen::MatrixXd a = to_eigen(symmetric);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

double spectral_norm(const Tensor& m) {
  const Eigen::MatrixXd a = to_eigen(m);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

Objective Objective::quadratic(Tensor a) {
  if (a.rank() != 2 || a.rows() != a.cols()) {
    throw PreconditionError("quadratic objective needs a square matrix, got " +
                            shape_string(a.shape()));
  }
  const std::size_t n = a.rows();
  const double scale = std::max(1.0, reduce(a, Reduction::kLinf));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a.at(i, j) - a.at(j, i)) > 1e-12 * scale) {
        throw PreconditionError("quadratic matrix is not symmetric at (" + std::to_string(i) +
                                "," + std::to_string(j) + ")");
      }
  if (min_eigenvalue(a) < -1e-10 * scale) {
    throw PreconditionError("quadratic matrix is not positive semidefinite");
  }
  Objective o;
  o.kind_ = Kind::kQuadratic;
  o.a_ = std::move(a);
  return o;
}

Objective Objective::rosenbrock(double a, double b) {
  Objective o;
  o.kind_ = Kind::kRosenbrock;
  o.ra_ = a;
  o.rb_ = b;
  o.a_ = Tensor::zeros({2, 2});
  return o;
}

std::size_t Objective::dimension() const noexcept {
  return kind_ == Kind::kQuadratic ? a_.rows() : 2;
}

double Objective::value(std::span<const double> w) const {
  if (w.size() != dimension()) {
    throw ShapeError("objective has dimension " + std::to_string(dimension()) + ", got " +
                     std::to_string(w.size()));
  }
  if (kind_ == Kind::kRosenbrock) {
    const double x = w[0], y = w[1];
    const double u = ra_ - x, r = y - x * x;
    return u * u + rb_ * r * r;
  }
  const std::size_t n = dimension();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < n; ++j) row += a_.at(i, j) * w[j];
    total += w[i] * row;
  }
  return 0.5 * total;
}

ObjectiveValue objective_eval(const Objective& obj, const Tensor& w) {
  const double loss = obj.value(w.data());
  if (obj.kind() == Objective::Kind::kRosenbrock) {
    const double a = obj.rosenbrock_a(), b = obj.rosenbrock_b();
    const double x = w[0], y = w[1];
    const double r = y - x * x;
    Tensor grad = Tensor::vector({-2.0 * (a - x) - 4.0 * b * x * r, 2.0 * b * r});
    Tensor hess = Tensor::from(
        {2, 2}, {2.0 - 4.0 * b * r + 8.0 * b * x * x, -4.0 * b * x, -4.0 * b * x, 2.0 * b});
    return {loss, grad.reshaped(w.shape()), std::move(hess)};
  }
  const Tensor& a = obj.matrix();
  const std::size_t n = obj.dimension();
  std::vector<double> grad(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) grad[i] += a.at(i, j) * w[j];
  return {loss, Tensor::from(w.shape(), std::move(grad)), a};
}

}  // namespace agr::nn
