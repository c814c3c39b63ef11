// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace agr {

using Shape = std::vector<std::size_t>;

/// Number of elements described by a shape. Throws ShapeError when the shape
/// is empty or has a zero dimension.
std::size_t element_count(const Shape& shape);

std::string shape_string(const Shape& shape);

/// Row-major, shape-tagged array of doubles.
///
/// Every public constructor validates the shape and rejects non-finite
/// elements, so a Tensor obtained through the API always satisfies
/// size() == product(shape()) with finite entries. Operations return new
/// tensors; the mutable accessors exist for optimizer kernels that update
/// parameters in place.
class Tensor {
 public:
  /// Zero-filled tensor.
  static Tensor zeros(Shape shape);
  static Tensor filled(Shape shape, double value);
  /// Takes ownership of `data`; throws ShapeError if its length does not
  /// match the shape and ParameterError on NaN/Inf.
  static Tensor from(Shape shape, std::vector<double> data);
  /// One-dimensional tensor holding `values`.
  static Tensor vector(std::initializer_list<double> values);
  static Tensor vector(std::span<const double> values);

  /// A default tensor is a single 0.0 of shape [1].
  Tensor();

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> mutable_data() noexcept { return data_; }

  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }

  /// Element (r, c) of a rank-2 tensor.
  double at(std::size_t r, std::size_t c) const noexcept {
    return data_[r * shape_[1] + c];
  }
  double& at(std::size_t r, std::size_t c) noexcept {
    return data_[r * shape_[1] + c];
  }

  std::size_t rows() const noexcept { return shape_.front(); }
  std::size_t cols() const noexcept { return shape_.size() > 1 ? shape_[1] : 1; }

  bool same_shape(const Tensor& other) const noexcept {
    return shape_ == other.shape_;
  }

  /// Same data under a new shape with equal element count.
  Tensor reshaped(Shape shape) const;

  bool all_finite() const noexcept;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Tensor(Shape shape, std::vector<double> data);

  Shape shape_;
  std::vector<double> data_;
};

enum class BinaryOp { kAdd, kSub, kMul, kDiv };

/// Elementwise a (op) b. Throws ShapeError on mismatched shapes and
/// DivisionError when dividing by an exact zero.
Tensor zip_binary(const Tensor& a, const Tensor& b, BinaryOp op);

struct UnaryOp {
  enum class Kind { kAbs, kNeg, kSquare, kScale, kAddScalar };
  Kind kind;
  double c = 0.0;

  static UnaryOp abs() { return {Kind::kAbs}; }
  static UnaryOp neg() { return {Kind::kNeg}; }
  static UnaryOp square() { return {Kind::kSquare}; }
  static UnaryOp scale(double c) { return {Kind::kScale, c}; }
  static UnaryOp add_scalar(double c) { return {Kind::kAddScalar, c}; }
};

Tensor map_unary(const Tensor& a, UnaryOp op);

enum class Reduction { kL1, kL2, kLinf, kSum, kMean };

double reduce(const Tensor& a, Reduction kind);
double reduce(std::span<const double> a, Reduction kind);

// Random fills.

struct Normal {
  double mean = 0.0;
  double stddev = 1.0;
};

struct LogNormal {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Half-open [lo, hi).
struct Uniform {
  double lo = 0.0;
  double hi = 1.0;
};

using Distribution = std::variant<Normal, LogNormal, Uniform>;

std::string distribution_name(const Distribution& d);

/// Pure function of its arguments: the same (shape, distribution, seed)
/// always yields a bit-identical tensor. See rng.hpp for the generator.
Tensor rand_fill(Shape shape, const Distribution& distribution,
                 std::uint64_t seed);

// Rank-2 helpers used by the network code.

/// a[m×k] · b[k×n].
Tensor matmul(const Tensor& a, const Tensor& b);
/// a[m×k] · b[n×k]ᵀ.
Tensor matmul_transposed(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace agr
