// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "agr/tensor.hpp"

namespace agr::harness {

struct Dataset {
  Tensor features;          // [n x dim]
  std::vector<int> labels;  // in [0, classes)
  int classes = 0;
  std::vector<std::string> feature_names;
  /// Original label strings in index order (CSV input only).
  std::vector<std::string> class_names;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return features.cols(); }

  /// Rows at `indices`, in that order.
  Dataset subset(std::span<const std::size_t> indices) const;
};

struct BlobsParams {
  std::size_t n = 200;
  int classes = 2;
  std::size_t dim = 2;
  double spread = 1.0;
};

/// Gaussian blobs around class centers. The first two coordinates of the
/// centers sit on a circle of radius 4, so the centers are always in convex
/// position; extra dimensions are uniform in [-4, 4). Label of row i is
/// i mod classes.
Dataset generate_blobs(const BlobsParams& params, std::uint64_t seed);

/// Two interleaving half circles, ceil(n/2) rows in class 0, with N(0, noise)
/// added to both coordinates.
Dataset generate_moons(std::size_t n, double noise, std::uint64_t seed);

/// Header row, numeric features, one label column of arbitrary strings.
/// Labels map to indices in order of first appearance. Throws IngestionError
/// with the row (1-based, header = row 1) and column on any problem.
Dataset load_csv_dataset(const std::filesystem::path& path,
                         const std::string& label_column);

/// Writes features in shortest round-trip form and the label column last.
void write_csv_dataset(const Dataset& data, const std::filesystem::path& path,
                       const std::string& label_column = "label");

/// Deterministic train/test split: shuffles row indices with `seed` and puts
/// the first round(fraction * n) rows in train.
std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction,
                                          std::uint64_t seed);

}  // namespace agr::harness
