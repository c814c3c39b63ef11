// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "agr/tensor.hpp"

namespace agr::nn {

enum class Activation { kRelu, kTanh, kIdentity };

std::string_view activation_name(Activation a);
std::optional<Activation> parse_activation(std::string_view name);

struct DenseLayer {
  Tensor weight;  // [out x in]
  Tensor bias;    // [out]
  Activation activation = Activation::kIdentity;

  std::size_t in_features() const noexcept { return weight.cols(); }
  std::size_t out_features() const noexcept { return weight.rows(); }
};

struct LayerGrads {
  Tensor weight;
  Tensor bias;
};

/// Fully connected network y = act(x W^T + b), layer by layer.
///
/// forward() caches pre- and post-activations; backward() consumes the cache
/// and invalidates it, so each backward must follow its own forward.
class Mlp {
 public:
  /// Throws ShapeError if consecutive layers do not chain.
  explicit Mlp(std::vector<DenseLayer> layers);

  /// Widths {in, h1, ..., out}. Hidden layers use `hidden`, the last layer
  /// is linear. Weights ~ N(0, gain/fan_in) with gain 2 for ReLU and 1
  /// otherwise; biases zero.
  static Mlp init(std::span<const std::size_t> widths, Activation hidden,
                  std::uint64_t seed);

  /// batch [B x in] -> logits [B x out].
  Tensor forward(const Tensor& batch);

  /// Gradients of the loss w.r.t. every layer's weight and bias, given the
  /// loss gradient at the logits. Throws StateError if the cache is stale.
  std::vector<LayerGrads> backward(const Tensor& loss_grad);

  /// Forward without touching the cache.
  Tensor predict(const Tensor& batch) const;

  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::size_t input_size() const noexcept { return layers_.front().in_features(); }
  std::size_t output_size() const noexcept { return layers_.back().out_features(); }
  std::size_t parameter_count() const noexcept;
  bool cache_valid() const noexcept { return cache_valid_; }

 private:
  std::vector<DenseLayer> layers_;
  Tensor input_;
  std::vector<Tensor> pre_;   // per-layer pre-activations
  std::vector<Tensor> post_;  // per-layer outputs
  bool cache_valid_ = false;
};

struct LossAndGrad {
  double loss = 0.0;
  Tensor grad;
};

/// Mean cross-entropy over the batch with a log-sum-exp stabilized softmax.
/// grad = (softmax - onehot) / batch. Throws ParameterError on labels outside
/// [0, classes).
LossAndGrad softmax_cross_entropy(const Tensor& logits, std::span<const int> labels);

/// 0.5 * sum((pred - target)^2) / batch; grad = (pred - target) / batch.
LossAndGrad mse_loss(const Tensor& pred, const Tensor& target);

std::vector<int> argmax_rows(const Tensor& logits);

/// Fraction of rows whose argmax equals the label.
double accuracy(const Tensor& logits, std::span<const int> labels);

// Closed-form test objectives.

class Objective {
 public:
  enum class Kind { kQuadratic, kRosenbrock };

  /// L(w) = 0.5 w^T A w. Throws PreconditionError unless A is square,
  /// symmetric (to 1e-12 relative) and positive semidefinite.
  static Objective quadratic(Tensor a);
  /// Two-dimensional (a - x)^2 + b (y - x^2)^2.
  static Objective rosenbrock(double a = 1.0, double b = 100.0);

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept;
  const Tensor& matrix() const noexcept { return a_; }
  double rosenbrock_a() const noexcept { return ra_; }
  double rosenbrock_b() const noexcept { return rb_; }

  /// Loss only.
  double value(std::span<const double> w) const;

 private:
  Objective() = default;

  Kind kind_ = Kind::kQuadratic;
  Tensor a_;
  double ra_ = 1.0;
  double rb_ = 100.0;
};

struct ObjectiveValue {
  double loss = 0.0;
  Tensor gradient;
  std::optional<Tensor> hessian;
};

/// Loss, gradient and Hessian at w. Throws ShapeError on a dimension mismatch.
ObjectiveValue objective_eval(const Objective& objective, const Tensor& w);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Tensor& symmetric);
/// Largest singular value of a rank-2 tensor.
double spectral_norm(const Tensor& m);

}  // namespace agr::nn
