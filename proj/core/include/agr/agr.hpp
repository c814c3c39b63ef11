// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>

#include "agr/tensor.hpp"

namespace agr {

/// Per-element shares of a gradient's L1 mass:
///   alpha_i = |g_i| / sum_j |g_j|
///
/// l1_total is the denominator. When it is zero the gradient carries no
/// signal, alpha is all-zero and the operator below reduces to the identity.
struct AgrCoefficients {
  Tensor alpha;
  double l1_total = 0.0;

  bool degenerate() const noexcept { return l1_total == 0.0; }
};

/// Coefficients over the whole tensor. Conv kernels and dense matrices alike
/// are treated as one flat vector; alpha never normalizes per row or channel.
AgrCoefficients compute_coefficients(const Tensor& g);

/// Adaptive gradient regularization:
///   psi(g)_i = (1 - alpha_i) * g_i
/// Same shape and sign as g, never larger in magnitude.
Tensor regularize(const Tensor& g);

/// In-place psi over a flat buffer. This is the hot path the optimizers use;
/// regularize() is defined in terms of it. Returns the L1 denominator.
double regularize_inplace(std::span<double> g) noexcept;

/// Per-coordinate learning rate eta * (1 - alpha_i) that plain SGD with AGR
/// effectively applies to the raw gradient. Throws ParameterError if eta <= 0.
Tensor effective_rate_view(double eta, const AgrCoefficients& coeffs);

/// What a parameter tensor is. Only weight matrices are regularized by
/// default; single-element or per-feature tensors would otherwise get
/// alpha close to 1 and stop learning.
enum class ParamRole { kDenseWeight, kConvKernel, kBias, kNormParam };

std::string_view role_name(ParamRole role);
/// Parses "dense_weight", "conv_kernel", "bias" or "norm_param".
std::optional<ParamRole> parse_role(std::string_view name);

struct AgrSchedule {
  bool enabled = false;
  /// AGR is active while epoch < until_epoch. Absent means never suspended.
  std::optional<std::uint64_t> until_epoch;
  std::set<ParamRole> eligible_roles = {ParamRole::kDenseWeight,
                                        ParamRole::kConvKernel};

  static AgrSchedule on() {
    AgrSchedule s;
    s.enabled = true;
    return s;
  }
  static AgrSchedule off() { return {}; }
};

bool should_apply(ParamRole role, const AgrSchedule& schedule,
                  std::uint64_t epoch) noexcept;

}  // namespace agr
