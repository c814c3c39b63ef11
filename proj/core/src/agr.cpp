// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/agr.hpp"

#include <cmath>

#include "agr/errors.hpp"

namespace agr {

AgrCoefficients compute_coefficients(const Tensor& g) {
  const auto x = g.data();
  const double total = reduce(x, Reduction::kL1);
  std::vector<double> alpha(x.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < x.size(); ++i) alpha[i] = std::abs(x[i]) / total;
  }
  return {Tensor::from(g.shape(), std::move(alpha)), total};
}

double regularize_inplace(std::span<double> g) noexcept {
  double total = 0.0;
  for (const double v : g) total += std::abs(v);
  if (total == 0.0) return 0.0;
  for (auto& v : g) v = (1.0 - std::abs(v) / total) * v;
  return total;
}

Tensor regularize(const Tensor& g) {
  std::vector<double> out(g.data().begin(), g.data().end());
  regularize_inplace(out);
  return Tensor::from(g.shape(), std::move(out));
}

Tensor effective_rate_view(double eta, const AgrCoefficients& coeffs) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ParameterError("effective_rate_view: eta must be positive");
  }
  const auto alpha = coeffs.alpha.data();
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = eta * (1.0 - alpha[i]);
  return Tensor::from(coeffs.alpha.shape(), std::move(out));
}

std::string_view role_name(ParamRole role) {
  switch (role) {
    case ParamRole::kDenseWeight: return "dense_weight";
    case ParamRole::kConvKernel: return "conv_kernel";
    case ParamRole::kBias: return "bias";
    case ParamRole::kNormParam: return "norm_param";
  }
  return "unknown";
}

std::optional<ParamRole> parse_role(std::string_view name) {
  for (const auto r : {ParamRole::kDenseWeight, ParamRole::kConvKernel,
                       ParamRole::kBias, ParamRole::kNormParam}) {
    if (role_name(r) == name) return r;
  }
  return std::nullopt;
}

bool should_apply(ParamRole role, const AgrSchedule& schedule,
                  std::uint64_t epoch) noexcept {
  if (!schedule.enabled) return false;
  if (!schedule.eligible_roles.contains(role)) return false;
  return !schedule.until_epoch || epoch < *schedule.until_epoch;
}

}  // namespace agr
