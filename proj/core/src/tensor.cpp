// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "agr/errors.hpp"
#include "agr/rng.hpp"

namespace agr {

std::size_t element_count(const Shape& shape) {
  if (shape.empty()) throw ShapeError("shape must have at least one dimension");
  std::size_t n = 1;
  for (const auto d : shape) {
    if (d == 0) throw ShapeError("zero dimension in shape " + shape_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

namespace {

void require_finite(std::span<const double> data, const char* what) {
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ParameterError(std::string(what) + ": non-finite element at index " +
                           std::to_string(i));
    }
  }
}

void require_same_shape(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("shape mismatch: " + shape_string(a.shape()) + " vs " +
                     shape_string(b.shape()));
  }
}

}  // namespace

Tensor::Tensor() : shape_{1}, data_(1, 0.0) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {}

Tensor Tensor::zeros(Shape shape) { return filled(std::move(shape), 0.0); }

Tensor Tensor::filled(Shape shape, double value) {
  const auto n = element_count(shape);
  if (!std::isfinite(value)) throw ParameterError("fill value must be finite");
  return Tensor(std::move(shape), std::vector<double>(n, value));
}

Tensor Tensor::from(Shape shape, std::vector<double> data) {
  const auto n = element_count(shape);
  if (data.size() != n) {
    throw ShapeError("data length " + std::to_string(data.size()) +
                     " does not match shape " + shape_string(shape));
  }
  require_finite(data, "Tensor::from");
  return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return from({values.size()}, std::vector<double>(values));
}

Tensor Tensor::vector(std::span<const double> values) {
  return from({values.size()}, std::vector<double>(values.begin(), values.end()));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (element_count(shape) != data_.size()) {
    throw ShapeError("cannot reshape " + shape_string(shape_) + " to " +
                     shape_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double x) { return std::isfinite(x); });
}

Tensor zip_binary(const Tensor& a, const Tensor& b, BinaryOp op) {
  require_same_shape(a, b);
  std::vector<double> out(a.size());
  const auto x = a.data();
  const auto y = b.data();
  switch (op) {
    case BinaryOp::kAdd:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] + y[i];
      break;
    case BinaryOp::kSub:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] - y[i];
      break;
    case BinaryOp::kMul:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * y[i];
      break;
    case BinaryOp::kDiv:
      for (std::size_t i = 0; i < out.size(); ++i) {
        if (y[i] == 0.0) {
          throw DivisionError("division by zero at index " + std::to_string(i));
        }
        out[i] = x[i] / y[i];
      }
      break;
  }
  return Tensor::from(a.shape(), std::move(out));
}

Tensor map_unary(const Tensor& a, UnaryOp op) {
  std::vector<double> out(a.data().begin(), a.data().end());
  switch (op.kind) {
    case UnaryOp::Kind::kAbs:
      for (auto& v : out) v = std::abs(v);
      break;
    case UnaryOp::Kind::kNeg:
      for (auto& v : out) v = -v;
      break;
    case UnaryOp::Kind::kSquare:
      for (auto& v : out) v = v * v;
      break;
    case UnaryOp::Kind::kScale:
      for (auto& v : out) v = op.c * v;
      break;
    case UnaryOp::Kind::kAddScalar:
      for (auto& v : out) v = v + op.c;
      break;
  }
  return Tensor::from(a.shape(), std::move(out));
}

double reduce(std::span<const double> a, Reduction kind) {
  if (a.empty()) throw ShapeError("reduce over an empty buffer");
  double acc = 0.0;
  switch (kind) {
    case Reduction::kL1:
      for (const double v : a) acc += std::abs(v);
      return acc;
    case Reduction::kL2:
      for (const double v : a) acc += v * v;
      return std::sqrt(acc);
    case Reduction::kLinf:
      for (const double v : a) acc = std::max(acc, std::abs(v));
      return acc;
    case Reduction::kSum:
      for (const double v : a) acc += v;
      return acc;
    case Reduction::kMean:
      for (const double v : a) acc += v;
      return acc / static_cast<double>(a.size());
  }
  return acc;
}

double reduce(const Tensor& a, Reduction kind) { return reduce(a.data(), kind); }

std::string distribution_name(const Distribution& d) {
  std::ostringstream os;
  std::visit(
      [&os](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          os << "normal(" << p.mean << "," << p.stddev << ")";
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          os << "lognormal(" << p.mu << "," << p.sigma << ")";
        } else {
          os << "uniform(" << p.lo << "," << p.hi << ")";
        }
      },
      d);
  return os.str();
}

Tensor rand_fill(Shape shape, const Distribution& distribution, std::uint64_t seed) {
  const auto n = element_count(shape);
  std::vector<double> out(n);
  Rng rng(seed);
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, Normal>) {
          if (!(p.stddev > 0.0) || !std::isfinite(p.mean)) {
            throw ParameterError("normal distribution needs stddev > 0");
          }
          for (auto& v : out) v = rng.normal(p.mean, p.stddev);
        } else if constexpr (std::is_same_v<T, LogNormal>) {
          if (!(p.sigma > 0.0) || !std::isfinite(p.mu)) {
            throw ParameterError("lognormal distribution needs sigma > 0");
          }
          for (auto& v : out) v = std::exp(rng.normal(p.mu, p.sigma));
        } else {
          if (!(p.lo < p.hi) || !std::isfinite(p.hi - p.lo)) {
            throw ParameterError("uniform distribution needs lo < hi");
          }
          for (auto& v : out) {
            v = rng.uniform(p.lo, p.hi);
            // lo + (hi-lo)*u can round up to hi for u close to 1.
            if (v >= p.hi) v = std::nextafter(p.hi, p.lo);
          }
        }
      },
      distribution);
  return Tensor::from(std::move(shape), std::move(out));
}

namespace {

void require_rank2(const Tensor& t, const char* name) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(name) + " must be rank 2, got " +
                     shape_string(t.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul lhs");
  require_rank2(b, "matmul rhs");
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  if (b.rows() != k) {
    throw ShapeError("matmul inner dimensions differ: " + shape_string(a.shape()) +
                     " x " + shape_string(b.shape()));
  }
  std::vector<double> out(m * n, 0.0);
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = x[i * k + p];
      const double* yrow = y.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += s * yrow[j];
    }
  }
  return Tensor::from({m, n}, std::move(out));
}

Tensor matmul_transposed(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul lhs");
  require_rank2(b, "matmul rhs");
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  if (b.cols() != k) {
    throw ShapeError("matmul_transposed inner dimensions differ: " +
                     shape_string(a.shape()) + " x " + shape_string(b.shape()) + "^T");
  }
  std::vector<double> out(m * n);
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < m; ++i) {
    const double* xrow = x.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* yrow = y.data() + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += xrow[p] * yrow[p];
      out[i * n + j] = acc;
    }
  }
  return Tensor::from({m, n}, std::move(out));
}

Tensor transpose(const Tensor& a) {
  require_rank2(a, "transpose");
  const std::size_t m = a.rows(), n = a.cols();
  std::vector<double> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.at(i, j);
  return Tensor::from({n, m}, std::move(out));
}

}  // namespace agr
