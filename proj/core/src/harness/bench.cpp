// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/harness/bench.hpp"

#include <algorithm>
#include <chrono>

#include "agr/errors.hpp"
#include "agr/nn.hpp"
#include "agr/optim.hpp"
#include "agr/rng.hpp"
#include "json.hpp"

namespace agr::harness {

std::string OverheadResult::to_json() const {
  nlohmann::ordered_json j;
  j["steps"] = steps;
  j["parameters"] = parameters;
  j["vanilla_ns_per_step"] = vanilla_ns_per_step;
  j["agr_ns_per_step"] = agr_ns_per_step;
  j["ratio"] = ratio;
  j["vanilla_update_ns"] = vanilla_update_ns;
  j["agr_update_ns"] = agr_update_ns;
  j["update_ratio"] = update_ratio;
  return j.dump(2);
}

namespace {

using Clock = std::chrono::steady_clock;

struct Arm {
  nn::Mlp model;
  Optimizer optimizer;
  std::vector<double> step_ns;
  std::vector<double> update_ns;
};

void timed_step(Arm& arm, const Tensor& batch, std::span<const int> labels) {
  const auto t0 = Clock::now();
  const auto loss = nn::softmax_cross_entropy(arm.model.forward(batch), labels);
  const auto grads = arm.model.backward(loss.grad);
  std::vector<Optimizer::Param> params;
  auto& layers = arm.model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    params.push_back({&layers[l].weight, &grads[l].weight, ParamRole::kDenseWeight});
    params.push_back({&layers[l].bias, &grads[l].bias, ParamRole::kBias});
  }
  const auto t1 = Clock::now();
  arm.optimizer.step(params, 0);
  const auto t2 = Clock::now();
  arm.step_ns.push_back(std::chrono::duration<double, std::nano>(t2 - t0).count());
  arm.update_ns.push_back(std::chrono::duration<double, std::nano>(t2 - t1).count());
}

double median(std::vector<double> v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

OverheadResult bench_overhead(const ExperimentConfig& cfg, std::size_t steps,
                              bool self_compare) {
  if (steps < 100) throw ParameterError("bench_overhead needs at least 100 steps");
  cfg.validate();

  const nn::Mlp init = nn::Mlp::init(cfg.widths, cfg.activation, derive_seed(cfg.seed, "init"));
  const Tensor batch = rand_fill({cfg.batch_size, cfg.widths.front()}, Normal{},
                                 derive_seed(cfg.seed, "bench"));
  std::vector<int> labels(cfg.batch_size);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<int>(i % cfg.widths.back());
  }

  OptimizerConfig off = cfg.optimizer;
  off.agr.enabled = false;
  OptimizerConfig on = cfg.optimizer;
  on.agr.enabled = !self_compare;
  Arm vanilla{init, Optimizer(off), {}, {}};
  Arm agr{init, Optimizer(on), {}, {}};

  constexpr std::size_t kWarmup = 20;
  for (std::size_t i = 0; i < kWarmup; ++i) {
    timed_step(vanilla, batch, labels);
    timed_step(agr, batch, labels);
  }
  for (Arm* a : {&vanilla, &agr}) {
    a->step_ns.clear();
    a->update_ns.clear();
  }

  // Alternating blocks keep slow drift (frequency scaling, other load) from
  // landing on one arm only.
  constexpr std::size_t kBlock = 10;
  for (std::size_t done = 0; done < steps; done += kBlock) {
    const std::size_t n = std::min(kBlock, steps - done);
    Arm& first = (done / kBlock) % 2 == 0 ? vanilla : agr;
    Arm& second = &first == &vanilla ? agr : vanilla;
    for (std::size_t i = 0; i < n; ++i) timed_step(first, batch, labels);
    for (std::size_t i = 0; i < n; ++i) timed_step(second, batch, labels);
  }

  OverheadResult r;
  r.steps = steps;
  r.parameters = init.parameter_count();
  r.vanilla_ns_per_step = median(vanilla.step_ns);
  r.agr_ns_per_step = median(agr.step_ns);
  r.ratio = r.agr_ns_per_step / r.vanilla_ns_per_step;
  r.vanilla_update_ns = median(vanilla.update_ns);
  r.agr_update_ns = median(agr.update_ns);
  r.update_ratio = r.agr_update_ns / r.vanilla_update_ns;
  return r;
}

}  // namespace agr::harness
