// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "agr/agr.hpp"
#include "agr/tensor.hpp"

namespace agr {

enum class OptimizerKind { kSgd, kSgdm, kAdam, kAdamW, kAdan, kRmsprop };

std::string_view kind_name(OptimizerKind kind);
std::optional<OptimizerKind> parse_kind(std::string_view name);

struct ParamSlots;

/// Adan restart hook. Called after each update with the slot's step index k;
/// returning true re-initializes the slot on the next call.
using AdanRestartPredicate =
    std::function<bool(std::uint64_t k, const ParamSlots& slots)>;

/// Hyperparameters shared by every optimizer kind.
///
/// Momentum conventions follow the printed algorithms:
///  - Adam/AdamW/RMSprop: m <- beta1*m + (1-beta1)*g, v <- beta2*v + (1-beta2)*g^2
///  - Adan: m <- (1-beta1)*m + beta1*g, likewise for v (beta2) and n (beta3)
///  - SGDM: m <- beta1*m + g, or beta1*m + (1-beta1)*g with sgdm_dampening
///
/// Weight decay is coupled (added to the gradient) for SGD, SGDM, Adam and
/// RMSprop. AdamW adds it to the gradient *and* subtracts lr_mult*lambda*theta
/// in the update, as printed. Adan divides by (1 + lambda*lr).
struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdamW;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double beta3 = 0.0;
  double eps = 1e-8;
  double weight_decay = 0.0;
  AgrSchedule agr;

  // Baselines, applied before AGR in the order clip -> centralize.
  std::optional<double> clip_norm;
  bool centralize = false;

  bool sgdm_dampening = false;
  /// Use psi(g_{k-1}) instead of raw g_{k-1} in Adan's difference moment.
  bool adan_v_uses_regularized_prev = false;
  AdanRestartPredicate adan_restart;

  static OptimizerConfig defaults(OptimizerKind kind);

  /// Throws ParameterError for lr <= 0, betas outside [0,1], eps <= 0,
  /// negative weight decay or non-positive clip_norm.
  void validate() const;
};

/// Per-parameter optimizer memory. Every tensor slot matches its parameter's
/// shape once the slot has been initialized.
struct ParamSlots {
  Tensor m;
  /// Second moment for Adam/AdamW/RMSprop, gradient-difference moment for Adan.
  Tensor v;
  /// Adan second moment.
  Tensor n;
  Tensor prev_grad;
  Tensor prev_regularized;
  /// Updates applied since (re)initialization.
  std::uint64_t steps = 0;
  /// Set when momentum slots were seeded by the caller (e.g. a warm-started
  /// RMSprop second moment) and must not be zeroed on the first step.
  bool warm = false;

  // Reused between steps to avoid allocating in the update loop.
  std::vector<double> raw_scratch;
  std::vector<double> reg_scratch;
  std::vector<double> diff_scratch;
};

struct OptimizerState {
  std::uint64_t step = 0;
  std::vector<ParamSlots> slots;
};

enum class MomentSlot {
  kFirst,              // m
  kSecond,             // v (Adam, AdamW, RMSprop) or n (Adan), before squaring
  kGradientDifference  // Adan's v
};

/// Instrumentation hook. Kernels call it with the exact buffers they feed
/// into each accumulator.
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  virtual void on_accumulator_input(std::size_t /*param*/, MomentSlot /*slot*/,
                                    std::span<const double> /*input*/) {}
  virtual void on_transform(std::size_t /*param*/, bool /*agr_applied*/) {}
};

struct StepContext {
  ParamRole role = ParamRole::kDenseWeight;
  std::uint64_t epoch = 0;
  /// Schedule multiplier (AdamW's eta_t); plain lr factor for the others.
  double lr_multiplier = 1.0;
  std::size_t param_index = 0;
  StepObserver* observer = nullptr;
};

/// Clip, centralize and AGR, in that order, each only if configured. AGR runs
/// when should_apply(role, config.agr, epoch) holds.
Tensor transform_gradient(const Tensor& g, const OptimizerConfig& config,
                          ParamRole role, std::uint64_t epoch);

/// The clip and centralize stages of transform_gradient, in place.
void apply_baselines(std::span<double> g, const OptimizerConfig& config);

// Single-parameter steps. Each uses state.slots[0], creating it on first use,
// and increments state.step. `w` and `g` must have equal shapes.

void sgd_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
              OptimizerState& state, const StepContext& ctx = {});
void sgdm_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
               OptimizerState& state, const StepContext& ctx = {});
void adam_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
               OptimizerState& state, const StepContext& ctx = {});
/// `g` is the loss gradient; lambda*w is added before AGR as printed.
void adamw_agr_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                    OptimizerState& state, const StepContext& ctx = {});
void adan_agr_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                   OptimizerState& state, const StepContext& ctx = {});
void rmsprop_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                  OptimizerState& state, const StepContext& ctx = {});

/// Dispatches on config.kind.
void optimizer_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                    OptimizerState& state, const StepContext& ctx = {});

/// Updates one parameter in place with its own slot. Does not touch any
/// global step counter.
void update_parameter(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                      ParamSlots& slots, const StepContext& ctx);

/// Multi-parameter optimizer owning its configuration and state.
class Optimizer {
 public:
  struct Param {
    Tensor* value;
    const Tensor* grad;
    ParamRole role;
  };

  explicit Optimizer(OptimizerConfig config);

  /// One step over all parameters. The parameter list must be the same
  /// length and order on every call.
  void step(std::span<const Param> params, std::uint64_t epoch,
            double lr_multiplier = 1.0);

  void set_observer(StepObserver* observer) noexcept { observer_ = observer; }

  const OptimizerConfig& config() const noexcept { return config_; }
  const OptimizerState& state() const noexcept { return state_; }

  /// Parameter updates so far in which AGR was applied.
  std::uint64_t agr_applications() const noexcept { return agr_applications_; }

 private:
  OptimizerConfig config_;
  OptimizerState state_;
  StepObserver* observer_ = nullptr;
  std::uint64_t agr_applications_ = 0;
};

}  // namespace agr
