// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <vector>

#include "agr/agr.hpp"
#include "agr/nn.hpp"
#include "agr/optim.hpp"
#include "agr/tensor.hpp"

namespace {

void BM_Regularize(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const agr::Tensor g = agr::rand_fill({n}, agr::Normal{}, 7);
  std::vector<double> buf(g.data().begin(), g.data().end());
  for (auto _ : state) {
    std::copy(g.data().begin(), g.data().end(), buf.begin());
    benchmark::DoNotOptimize(agr::regularize_inplace(buf));
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_Regularize)->RangeMultiplier(8)->Range(64, 1 << 18);

void BM_AdamWStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  auto config = agr::OptimizerConfig::defaults(agr::OptimizerKind::kAdamW);
  config.agr.enabled = state.range(1) != 0;
  agr::Tensor w = agr::rand_fill({n}, agr::Normal{}, 1);
  const agr::Tensor g = agr::rand_fill({n}, agr::Normal{}, 2);
  agr::OptimizerState st;
  for (auto _ : state) {
    agr::adamw_agr_step(w, g, config, st);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_AdamWStep)->ArgsProduct({{1 << 10, 1 << 16}, {0, 1}})->ArgNames({"n", "agr"});

void BM_TrainStep(benchmark::State& state) {
  const std::vector<std::size_t> widths = {64, 256, 256, 64};
  agr::nn::Mlp model = agr::nn::Mlp::init(widths, agr::nn::Activation::kRelu, 3);
  auto config = agr::OptimizerConfig::defaults(agr::OptimizerKind::kAdamW);
  config.agr.enabled = state.range(0) != 0;
  agr::Optimizer opt(config);
  const agr::Tensor batch = agr::rand_fill({32, 64}, agr::Normal{}, 4);
  std::vector<int> labels(32);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 64);
  for (auto _ : state) {
    const auto loss = agr::nn::softmax_cross_entropy(model.forward(batch), labels);
    const auto grads = model.backward(loss.grad);
    std::vector<agr::Optimizer::Param> params;
    auto& layers = model.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      params.push_back({&layers[l].weight, &grads[l].weight, agr::ParamRole::kDenseWeight});
      params.push_back({&layers[l].bias, &grads[l].bias, agr::ParamRole::kBias});
    }
    opt.step(params, 0);
  }
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->ArgName("agr")->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
