// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agr/agr.hpp"
#include "agr/nn.hpp"
#include "agr/tensor.hpp"

namespace agr::verify {

using Regularizer = std::function<Tensor(const Tensor&)>;
using CoefficientFn = std::function<AgrCoefficients(const Tensor&)>;

struct TrialConfig {
  std::uint64_t trials = 10000;
  std::vector<Shape> shapes = {{1, 1}, {1, 8},   {3, 5},    {16, 16},
                               {32, 10}, {64, 64}, {8, 8, 3, 3}};
  std::vector<Distribution> distributions = {Normal{0.0, 1.0}, LogNormal{0.0, 1.0}};
  std::uint64_t seed = 42;

  /// Check name -> tolerance. Missing entries fall back to the defaults in
  /// tolerance().
  std::map<std::string, double> tolerances;

  /// Largest quadratic dimension in the Jacobian check.
  std::size_t max_quadratic_dim = 20;
  /// Momentum recursion length for the learning-rate check.
  std::size_t recursion_steps = 10;
  std::size_t placement_steps = 100;

  /// Mutation hooks for sanity-testing the checks themselves. Empty means
  /// the library implementation.
  Regularizer regularizer;
  CoefficientFn coefficients;

  double tolerance(const std::string& name) const;
  /// Throws ParameterError unless trials >= 1 and every tolerance > 0.
  void validate() const;
};

/// One row of the report. worst_margin is the signed distance to the bound
/// over all trials (negative means violated).
struct CheckResult {
  std::string name;
  std::uint64_t trials = 0;
  std::uint64_t failures = 0;
  double worst_margin = 0.0;
  /// Informational rows are reported but never fail the suite.
  bool informational = false;
  std::optional<std::string> example;

  bool passed() const noexcept { return informational || failures == 0; }
  /// Counts a failure when margin < -tol.
  void record(double margin, double tol, const std::function<std::string()>& describe);
  void record_outcome(double margin, bool failed, const std::function<std::string()>& describe);
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const noexcept;
  const CheckResult* find(const std::string& name) const;
  /// {"pass": bool, "checks": {name: {trials, failures, worst_margin,
  ///  informational, example?}}}
  std::string to_json() const;
};

/// Random gradient for trial `index`: shape and distribution cycle through
/// the config lists; lognormal magnitudes get random signs.
Tensor sample_gradient(const TrialConfig& cfg, std::uint64_t stream, std::uint64_t index);

/// ||psi(g)||_2 <= ||g||_2 and |psi(g)_i| <= |g_i|.
/// Rows: theorem41_norm_contraction.
std::vector<CheckResult> check_norm_contraction(const TrialConfig& cfg);

/// sum(alpha) == 1 and alpha in [0, 1] for non-degenerate g.
/// Rows: coefficient_simplex.
std::vector<CheckResult> check_coefficient_simplex(const TrialConfig& cfg);

struct JacobianProbe {
  Tensor jacobian;          // finite-difference d psi(A w) / d w
  double jacobian_norm = 0.0;
  double hessian_norm = 0.0;
  /// J_ii / A_ii and the predicted (1 - alpha_i)^2, for diagonal A.
  std::vector<double> diagonal_ratio;
  std::vector<double> predicted_factor;
};

/// Jacobian of w -> psi(A w) at w by central differences with step h.
/// Throws PreconditionError unless A is symmetric PSD.
JacobianProbe probe_jacobian(const Tensor& a, const Tensor& w, double h,
                             const Regularizer& psi = {});

/// Spectral bound on PSD quadratics plus the per-coordinate diagonal factor.
/// Rows: theorem41_jacobian_spectral, theorem41_jacobian_diagonal,
/// theorem41_jacobian_rosenbrock (informational).
std::vector<CheckResult> check_jacobian_bound(const TrialConfig& cfg);

/// SGD effective-rate identity (bit-level) and the unrolled momentum sum.
/// Rows: theorem42_sgd_rate, theorem42_momentum_recursion,
/// theorem42_constant_alpha_split (informational).
std::vector<CheckResult> check_lr_equivalence(const TrialConfig& cfg);

/// Raw gradients feed second moments, psi(g) feeds the first.
/// Rows: placement_adamw, placement_adan.
std::vector<CheckResult> check_placement(const TrialConfig& cfg);

/// Analytic vs central-difference gradients.
/// Rows: gradcheck_objectives, gradcheck_mlp.
std::vector<CheckResult> check_gradients(const TrialConfig& cfg);

/// Central differences (f(w + h e_i) - f(w - h e_i)) / 2h. Throws
/// ParameterError if h <= 0.
Tensor finite_difference_gradient(const std::function<double(const Tensor&)>& f,
                                  const Tensor& w, double h);

enum class Suite { kAll, kTheorem41, kTheorem42, kPlacement, kGradcheck };

std::optional<Suite> parse_suite(std::string_view name);

VerifyReport run_suite(const TrialConfig& cfg, Suite suite = Suite::kAll);

}  // namespace agr::verify
