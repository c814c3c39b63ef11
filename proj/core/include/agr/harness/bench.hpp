// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>

#include "agr/harness/config.hpp"

namespace agr::harness {

struct OverheadResult {
  std::size_t steps = 0;
  std::size_t parameters = 0;
  // Full training step: forward, backward, optimizer update.
  double vanilla_ns_per_step = 0.0;
  double agr_ns_per_step = 0.0;
  double ratio = 0.0;
  // Optimizer update alone.
  double vanilla_update_ns = 0.0;
  double agr_update_ns = 0.0;
  double update_ratio = 0.0;

  std::string to_json() const;
};

/// Median per-step wall time with AGR off and on over identical gradient
/// workloads. Both arms start from the same model and batch and are timed in
/// alternating blocks. Throws ParameterError if `steps` < 100. With
/// `self_compare` both arms run AGR off, which measures the noise floor.
OverheadResult bench_overhead(const ExperimentConfig& cfg, std::size_t steps,
                              bool self_compare = false);

}  // namespace agr::harness
