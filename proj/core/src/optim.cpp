// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/optim.hpp"

#include <algorithm>
#include <cmath>

#include "agr/errors.hpp"

namespace agr {

std::string_view kind_name(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kSgdm: return "sgdm";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kAdamW: return "adamw";
    case OptimizerKind::kAdan: return "adan";
    case OptimizerKind::kRmsprop: return "rmsprop";
  }
  return "unknown";
}

std::optional<OptimizerKind> parse_kind(std::string_view name) {
  for (const auto k : {OptimizerKind::kSgd, OptimizerKind::kSgdm, OptimizerKind::kAdam,
                       OptimizerKind::kAdamW, OptimizerKind::kAdan,
                       OptimizerKind::kRmsprop}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

OptimizerConfig OptimizerConfig::defaults(OptimizerKind kind) {
  OptimizerConfig c;
  c.kind = kind;
  switch (kind) {
    case OptimizerKind::kSgd:
      c.lr = 0.01;
      break;
    case OptimizerKind::kSgdm:
      c.lr = 0.01;
      c.beta1 = 0.9;
      break;
    case OptimizerKind::kAdam:
    case OptimizerKind::kAdamW:
      c.lr = 0.001;
      c.beta1 = 0.9;
      c.beta2 = 0.999;
      c.eps = 1e-8;
      break;
    case OptimizerKind::kAdan:
      // (1 - beta) * old + beta * new convention.
      c.lr = 0.001;
      c.beta1 = 0.02;
      c.beta2 = 0.08;
      c.beta3 = 0.01;
      c.eps = 1e-8;
      break;
    case OptimizerKind::kRmsprop:
      c.lr = 0.01;
      c.beta2 = 0.99;
      c.eps = 1e-8;
      break;
  }
  return c;
}

void OptimizerConfig::validate() const {
  auto unit = [](double b) { return b >= 0.0 && b <= 1.0; };
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ParameterError("lr must be positive");
  if (!unit(beta1) || !unit(beta2) || !unit(beta3)) {
    throw ParameterError("momentum coefficients must lie in [0, 1]");
  }
  if (!(eps > 0.0)) throw ParameterError("eps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ParameterError("weight_decay must be non-negative");
  }
  if (clip_norm && !(*clip_norm > 0.0)) throw ParameterError("clip_norm must be positive");
}

void apply_baselines(std::span<double> g, const OptimizerConfig& config) {
  if (config.clip_norm) {
    const double norm = reduce(g, Reduction::kL2);
    if (norm > *config.clip_norm) {
      const double scale = *config.clip_norm / norm;
      for (auto& v : g) v *= scale;
    }
  }
  if (config.centralize) {
    const double mean = reduce(g, Reduction::kMean);
    for (auto& v : g) v -= mean;
  }
}

Tensor transform_gradient(const Tensor& g, const OptimizerConfig& config, ParamRole role,
                          std::uint64_t epoch) {
  std::vector<double> out(g.data().begin(), g.data().end());
  apply_baselines(out, config);
  if (should_apply(role, config.agr, epoch)) regularize_inplace(out);
  return Tensor::from(g.shape(), std::move(out));
}

namespace {

bool couples_weight_decay(OptimizerKind kind) { return kind != OptimizerKind::kAdan; }

void ensure_slot(Tensor& slot, const Shape& shape) {
  if (slot.shape() != shape) slot = Tensor::zeros(shape);
}

void notify(const StepContext& ctx, MomentSlot slot, std::span<const double> input) {
  if (ctx.observer) ctx.observer->on_accumulator_input(ctx.param_index, slot, input);
}

// SGD with psi applied through the per-coordinate rate lr * (1 - alpha_i).
void sgd_kernel(std::span<double> w, std::span<const double> raw, bool agr, double lr) {
  if (!agr) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * raw[i];
    return;
  }
  double total = 0.0;
  for (const double v : raw) total += std::abs(v);
  if (total == 0.0) return;  // psi is the identity and the gradient is zero.
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double rate = lr * (1.0 - std::abs(raw[i]) / total);
    w[i] = w[i] - rate * raw[i];
  }
}

void sgdm_kernel(std::span<double> w, std::span<const double> reg, ParamSlots& s,
                 const OptimizerConfig& c, double lr, const StepContext& ctx) {
  notify(ctx, MomentSlot::kFirst, reg);
  auto m = s.m.mutable_data();
  const double b1 = c.beta1;
  if (c.sgdm_dampening) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = b1 * m[i] + (1.0 - b1) * reg[i];
  } else {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = b1 * m[i] + reg[i];
  }
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * m[i];
}

// Adam and AdamW share the moment updates; AdamW adds the decoupled term.
void adam_kernel(std::span<double> w, std::span<const double> raw,
                 std::span<const double> reg, ParamSlots& s, const OptimizerConfig& c,
                 double lr, double multiplier, bool decoupled, const StepContext& ctx) {
  notify(ctx, MomentSlot::kFirst, reg);
  notify(ctx, MomentSlot::kSecond, raw);
  auto m = s.m.mutable_data();
  auto v = s.v.mutable_data();
  const double b1 = c.beta1, b2 = c.beta2, eps = c.eps, wd = c.weight_decay;
  const auto t = static_cast<double>(s.steps + 1);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  for (std::size_t i = 0; i < w.size(); ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * reg[i];
    v[i] = b2 * v[i] + (1.0 - b2) * (raw[i] * raw[i]);
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    if (decoupled) {
      w[i] = w[i] - multiplier * (lr * mhat / (std::sqrt(vhat) + eps) + wd * w[i]);
    } else {
      w[i] = w[i] - lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

void rmsprop_kernel(std::span<double> w, std::span<const double> raw,
                    std::span<const double> reg, ParamSlots& s, const OptimizerConfig& c,
                    double lr, const StepContext& ctx) {
  notify(ctx, MomentSlot::kFirst, reg);
  notify(ctx, MomentSlot::kSecond, raw);
  auto v = s.v.mutable_data();
  const double b2 = c.beta2, eps = c.eps;
  for (std::size_t i = 0; i < w.size(); ++i) {
    v[i] = b2 * v[i] + (1.0 - b2) * (raw[i] * raw[i]);
    w[i] = w[i] - lr * reg[i] / (std::sqrt(v[i]) + eps);
  }
}

void adan_kernel(std::span<double> w, std::span<const double> raw,
                 std::span<const double> reg, ParamSlots& s, const OptimizerConfig& c,
                 double lr, const StepContext& ctx) {
  const double b1 = c.beta1, b2 = c.beta2, b3 = c.beta3, eps = c.eps;
  auto m = s.m.mutable_data();
  auto v = s.v.mutable_data();
  auto n = s.n.mutable_data();
  auto prev = s.prev_grad.mutable_data();
  auto prev_reg = s.prev_regularized.mutable_data();
  const std::size_t size = w.size();
  const std::span<const double> prev_for_v =
      c.adan_v_uses_regularized_prev ? std::span<const double>(prev_reg)
                                     : std::span<const double>(prev);
  const std::uint64_t k = s.steps;

  if (k == 0) {
    // m0 = g0 (psi applied when active), v0 = 0, n0 = g0^2.
    notify(ctx, MomentSlot::kFirst, reg);
    notify(ctx, MomentSlot::kSecond, raw);
    for (std::size_t i = 0; i < size; ++i) {
      m[i] = reg[i];
      v[i] = 0.0;
      n[i] = raw[i] * raw[i];
    }
  } else {
    auto& d = s.diff_scratch;
    d.resize(size);

    notify(ctx, MomentSlot::kFirst, reg);
    for (std::size_t i = 0; i < size; ++i) d[i] = reg[i] - prev_for_v[i];
    notify(ctx, MomentSlot::kGradientDifference, d);
    if (k == 1) {
      for (std::size_t i = 0; i < size; ++i) v[i] = d[i];
    } else {
      for (std::size_t i = 0; i < size; ++i) v[i] = (1.0 - b2) * v[i] + b2 * d[i];
    }
    for (std::size_t i = 0; i < size; ++i) m[i] = (1.0 - b1) * m[i] + b1 * reg[i];
    for (std::size_t i = 0; i < size; ++i) d[i] = raw[i] + (1.0 - b2) * (raw[i] - prev[i]);
    notify(ctx, MomentSlot::kSecond, d);
    for (std::size_t i = 0; i < size; ++i) n[i] = (1.0 - b3) * n[i] + b3 * (d[i] * d[i]);
  }

  const double decay = 1.0 + c.weight_decay * lr;
  for (std::size_t i = 0; i < size; ++i) {
    const double rate = lr / (std::sqrt(n[i]) + eps);
    w[i] = (w[i] - rate * (m[i] + (1.0 - b2) * v[i])) / decay;
  }
  std::copy(raw.begin(), raw.end(), prev.begin());
  std::copy(reg.begin(), reg.end(), prev_reg.begin());
}

}  // namespace

void update_parameter(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                      ParamSlots& s, const StepContext& ctx) {
  if (!w.same_shape(g)) {
    throw ShapeError("parameter " + shape_string(w.shape()) + " and gradient " +
                     shape_string(g.shape()) + " differ");
  }
  const Shape& shape = w.shape();
  const auto kind = config.kind;

  if (s.steps == 0 && !s.warm) {
    s.m = Tensor::zeros(shape);
    s.v = Tensor::zeros(shape);
    if (kind == OptimizerKind::kAdan) {
      s.n = Tensor::zeros(shape);
      s.prev_grad = Tensor::zeros(shape);
      s.prev_regularized = Tensor::zeros(shape);
    }
  } else {
    ensure_slot(s.m, shape);
    ensure_slot(s.v, shape);
    if (kind == OptimizerKind::kAdan) {
      ensure_slot(s.n, shape);
      ensure_slot(s.prev_grad, shape);
      ensure_slot(s.prev_regularized, shape);
    }
  }

  auto wd = w.mutable_data();
  const auto gd = g.data();

  // Raw gradient: coupled weight decay, then clip/centralize.
  auto& raw = s.raw_scratch;
  raw.resize(gd.size());
  if (couples_weight_decay(kind) && config.weight_decay != 0.0) {
    for (std::size_t i = 0; i < gd.size(); ++i) raw[i] = gd[i] + config.weight_decay * wd[i];
  } else {
    std::copy(gd.begin(), gd.end(), raw.begin());
  }
  apply_baselines(raw, config);

  const bool agr = should_apply(ctx.role, config.agr, ctx.epoch);
  if (ctx.observer) ctx.observer->on_transform(ctx.param_index, agr);

  std::span<const double> reg = raw;
  if (agr && kind != OptimizerKind::kSgd) {
    s.reg_scratch.assign(raw.begin(), raw.end());
    regularize_inplace(s.reg_scratch);
    reg = s.reg_scratch;
  }

  const double lr = config.lr * ctx.lr_multiplier;
  switch (kind) {
    case OptimizerKind::kSgd:
      sgd_kernel(wd, raw, agr, lr);
      break;
    case OptimizerKind::kSgdm:
      sgdm_kernel(wd, reg, s, config, lr, ctx);
      break;
    case OptimizerKind::kAdam:
      adam_kernel(wd, raw, reg, s, config, config.lr * ctx.lr_multiplier, 1.0, false, ctx);
      break;
    case OptimizerKind::kAdamW:
      // The schedule multiplier scales both terms, the base rate only the first.
      adam_kernel(wd, raw, reg, s, config, config.lr, ctx.lr_multiplier, true, ctx);
      break;
    case OptimizerKind::kAdan:
      adan_kernel(wd, raw, reg, s, config, lr, ctx);
      break;
    case OptimizerKind::kRmsprop:
      rmsprop_kernel(wd, raw, reg, s, config, lr, ctx);
      break;
  }
  ++s.steps;
  s.warm = false;

  if (kind == OptimizerKind::kAdan && config.adan_restart &&
      config.adan_restart(s.steps - 1, s)) {
    s.steps = 0;
  }
}

namespace {

void single_step(OptimizerKind kind, Tensor& w, const Tensor& g,
                 const OptimizerConfig& config, OptimizerState& state,
                 const StepContext& ctx) {
  if (state.slots.empty()) state.slots.emplace_back();
  if (config.kind == kind) {
    update_parameter(w, g, config, state.slots.front(), ctx);
  } else {
    OptimizerConfig c = config;
    c.kind = kind;
    update_parameter(w, g, c, state.slots.front(), ctx);
  }
  ++state.step;
}

}  // namespace

void sgd_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
              OptimizerState& state, const StepContext& ctx) {
  single_step(OptimizerKind::kSgd, w, g, config, state, ctx);
}

void sgdm_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
               OptimizerState& state, const StepContext& ctx) {
  single_step(OptimizerKind::kSgdm, w, g, config, state, ctx);
}

void adam_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
               OptimizerState& state, const StepContext& ctx) {
  single_step(OptimizerKind::kAdam, w, g, config, state, ctx);
}

void adamw_agr_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                    OptimizerState& state, const StepContext& ctx) {
  single_step(OptimizerKind::kAdamW, w, g, config, state, ctx);
}

void adan_agr_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                   OptimizerState& state, const StepContext& ctx) {
  single_step(OptimizerKind::kAdan, w, g, config, state, ctx);
}

void rmsprop_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                  OptimizerState& state, const StepContext& ctx) {
  single_step(OptimizerKind::kRmsprop, w, g, config, state, ctx);
}

void optimizer_step(Tensor& w, const Tensor& g, const OptimizerConfig& config,
                    OptimizerState& state, const StepContext& ctx) {
  single_step(config.kind, w, g, config, state, ctx);
}

Optimizer::Optimizer(OptimizerConfig config) : config_(std::move(config)) {
  config_.validate();
}

void Optimizer::step(std::span<const Param> params, std::uint64_t epoch,
                     double lr_multiplier) {
  if (state_.slots.empty()) {
    state_.slots.resize(params.size());
  } else if (state_.slots.size() != params.size()) {
    throw StateError("optimizer was created for " + std::to_string(state_.slots.size()) +
                     " parameters, got " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    StepContext ctx;
    ctx.role = params[i].role;
    ctx.epoch = epoch;
    ctx.lr_multiplier = lr_multiplier;
    ctx.param_index = i;
    ctx.observer = observer_;
    if (should_apply(ctx.role, config_.agr, epoch)) ++agr_applications_;
    update_parameter(*params[i].value, *params[i].grad, config_, state_.slots[i], ctx);
  }
  ++state_.step;
}

}  // namespace agr
