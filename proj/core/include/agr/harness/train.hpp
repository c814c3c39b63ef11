// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "agr/harness/config.hpp"
#include "agr/harness/dataset.hpp"
#include "agr/nn.hpp"

namespace agr::harness {

/// One epoch of one run. Serialized as a JSONL line with keys
/// run_id, seed, epoch, train_loss, test_acc, wall_ms, agr_active,
/// optimizer, lr, weight_decay.
struct TrainRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::uint64_t epoch = 0;
  double train_loss = 0.0;
  double test_acc = 0.0;
  double wall_ms = 0.0;
  bool agr_active = false;
  std::string optimizer;
  double lr = 0.0;
  double weight_decay = 0.0;

  std::string to_json() const;
};

struct TrainResult {
  std::vector<TrainRecord> records;
  nn::Mlp model;
  Dataset train;
  Dataset test;
  /// Parameter updates with psi applied, per epoch.
  std::vector<std::uint64_t> agr_applications;
  /// Accuracy of the untrained model on the test split.
  double initial_test_acc = 0.0;

  double final_train_accuracy() const;
};

/// Trains cfg.widths on the configured dataset. Initialization, split and the
/// per-epoch batch order derive from cfg.seed only.
TrainResult train_loop(const ExperimentConfig& cfg);

/// Same as above with an explicit dataset (already materialized).
TrainResult train_loop(const ExperimentConfig& cfg, const Dataset& data);

void write_jsonl(std::ostream& out, const std::vector<TrainRecord>& records);

struct ArmSummary {
  std::string label;
  std::size_t runs = 0;
  double mean_final_train_loss = 0.0;
  double mean_final_test_acc = 0.0;
  std::vector<double> final_train_loss;
  std::vector<double> final_test_acc;
  /// Mean train loss per epoch across runs.
  std::vector<double> mean_loss_curve;
};

struct PairedSummary {
  ArmSummary agr;
  ArmSummary vanilla;
  double loss_ratio = 0.0;      // agr / vanilla mean final train loss
  double loss_delta = 0.0;      // agr - vanilla
  double test_acc_delta = 0.0;  // agr - vanilla

  std::string to_json() const;
};

struct ExperimentOutput {
  std::vector<TrainRecord> records;  // every run, in run order
  std::vector<ArmSummary> arms;
  std::optional<PairedSummary> paired;

  std::string summary_json() const;
};

/// Runs `repeats` seeds (cfg.seed, cfg.seed + 1, ...). With `paired`, each
/// seed trains an AGR-on and an AGR-off arm from the same initialization and
/// batch order. Runs execute on up to `workers` threads; output order does
/// not depend on scheduling.
ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool paired,
                                std::size_t repeats, std::size_t workers = 0);

}  // namespace agr::harness
