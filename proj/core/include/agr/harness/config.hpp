// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "agr/nn.hpp"
#include "agr/optim.hpp"
#include "agr/harness/dataset.hpp"

namespace agr::harness {

/// Flat key-value document: a small TOML subset.
///
///   # comment
///   key = 1.5
///   name = "text"
///   flag = true
///   widths = [2, 32, 2]
///   [section]          # following keys become "section.key"
///
/// Values are kept as their source text (strings unquoted) and converted on
/// access, so error messages can quote what the user wrote.
class KeyValueFile {
 public:
  static KeyValueFile parse(const std::string& text, const std::string& origin = "<string>");
  static KeyValueFile load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.contains(key); }

  std::optional<std::string> get_string(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& key) const;
  std::optional<bool> get_bool(const std::string& key) const;
  std::optional<std::vector<std::string>> get_list(const std::string& key) const;

  /// Keys not in `known`, in file order.
  std::vector<std::string> unknown_keys(const std::vector<std::string>& known) const;

  const std::string& origin() const noexcept { return origin_; }

 private:
  struct Entry {
    std::string text;
    bool quoted = false;
    bool list = false;
    int line = 0;
  };

  const Entry* entry(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& what) const;

  std::string origin_;
  std::map<std::string, Entry> values_;
  std::vector<std::string> order_;
};

struct CsvSource {
  std::filesystem::path path;
  std::string label_column = "label";
};

struct MoonsSource {
  std::size_t n = 1000;
  double noise = 0.1;
};

using DatasetSource = std::variant<BlobsParams, MoonsSource, CsvSource>;

enum class LrSchedule { kConstant, kLinear };

struct ExperimentConfig {
  std::string run_id = "run";
  std::vector<std::size_t> widths = {2, 32, 32, 2};
  nn::Activation activation = nn::Activation::kRelu;
  DatasetSource dataset = MoonsSource{};
  /// Seed for synthetic datasets; defaults to `seed`.
  std::optional<std::uint64_t> data_seed;
  OptimizerConfig optimizer = OptimizerConfig::defaults(OptimizerKind::kAdamW);
  LrSchedule lr_schedule = LrSchedule::kConstant;
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  double split = 0.8;
  std::uint64_t seed = 42;
  std::filesystem::path output = "records.jsonl";
  /// Write wall_ms = 0 so records are byte-reproducible.
  bool record_timing = true;

  /// Throws ConfigError on violated invariants.
  void validate() const;
};

/// Builds a config from a key-value file. Unknown keys and malformed values
/// raise ConfigError naming the key.
ExperimentConfig experiment_from_file(const KeyValueFile& file);
ExperimentConfig load_experiment(const std::filesystem::path& path);

Dataset materialize_dataset(const ExperimentConfig& cfg);

}  // namespace agr::harness
