// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/harness/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

#include "agr/errors.hpp"
#include "agr/rng.hpp"

namespace agr::harness {

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  const std::size_t d = dim();
  std::vector<double> feats;
  feats.reserve(indices.size() * d);
  std::vector<int> labs;
  labs.reserve(indices.size());
  for (const auto i : indices) {
    const auto row = features.data().subspan(i * d, d);
    feats.insert(feats.end(), row.begin(), row.end());
    labs.push_back(labels[i]);
  }
  Dataset out;
  out.features = Tensor::from({indices.size(), d}, std::move(feats));
  out.labels = std::move(labs);
  out.classes = classes;
  out.feature_names = feature_names;
  out.class_names = class_names;
  return out;
}

namespace {

std::vector<std::string> default_feature_names(std::size_t dim) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim; ++i) names.push_back("x" + std::to_string(i));
  return names;
}

}  // namespace

Dataset generate_blobs(const BlobsParams& p, std::uint64_t seed) {
  if (p.classes < 2 || p.n < static_cast<std::size_t>(p.classes)) {
    throw ParameterError("blobs need classes >= 2 and n >= classes");
  }
  if (p.dim < 1) throw ParameterError("blobs need dim >= 1");
  if (!(p.spread >= 0.0)) throw ParameterError("blobs spread must be non-negative");

  const auto classes = static_cast<std::size_t>(p.classes);
  Rng center_rng(derive_seed(seed, "blob-centers"));
  std::vector<double> centers(classes * p.dim);
  for (std::size_t c = 0; c < classes; ++c) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    for (std::size_t j = 0; j < p.dim; ++j) {
      double v;
      if (p.dim == 1) {
        v = 4.0 * static_cast<double>(c);
      } else if (j == 0) {
        v = 4.0 * std::cos(angle);
      } else if (j == 1) {
        v = 4.0 * std::sin(angle);
      } else {
        v = center_rng.uniform(-4.0, 4.0);
      }
      centers[c * p.dim + j] = v;
    }
  }

  Rng rng(derive_seed(seed, "blob-points"));
  std::vector<double> feats(p.n * p.dim);
  std::vector<int> labels(p.n);
  for (std::size_t i = 0; i < p.n; ++i) {
    const std::size_t c = i % classes;
    labels[i] = static_cast<int>(c);
    for (std::size_t j = 0; j < p.dim; ++j) {
      const double noise = rng.normal();
      feats[i * p.dim + j] = centers[c * p.dim + j] + p.spread * noise;
    }
  }
  Dataset out;
  out.features = Tensor::from({p.n, p.dim}, std::move(feats));
  out.labels = std::move(labels);
  out.classes = p.classes;
  out.feature_names = default_feature_names(p.dim);
  return out;
}

Dataset generate_moons(std::size_t n, double noise, std::uint64_t seed) {
  if (n < 2) throw ParameterError("moons need n >= 2");
  if (!(noise >= 0.0)) throw ParameterError("moons noise must be non-negative");
  const std::size_t outer = (n + 1) / 2;
  const std::size_t inner = n - outer;
  Rng rng(derive_seed(seed, "moons"));
  std::vector<double> feats(n * 2);
  std::vector<int> labels(n);
  auto angle = [](std::size_t i, std::size_t count) {
    return count > 1 ? std::numbers::pi * static_cast<double>(i) / static_cast<double>(count - 1)
                     : 0.0;
  };
  for (std::size_t i = 0; i < n; ++i) {
    double x, y;
    if (i < outer) {
      const double t = angle(i, outer);
      x = std::cos(t);
      y = std::sin(t);
      labels[i] = 0;
    } else {
      const double t = angle(i - outer, inner);
      x = 1.0 - std::cos(t);
      y = 0.5 - std::sin(t);
      labels[i] = 1;
    }
    const double nx = rng.normal();
    const double ny = rng.normal();
    feats[2 * i] = x + noise * nx;
    feats[2 * i + 1] = y + noise * ny;
  }
  Dataset out;
  out.features = Tensor::from({n, 2}, std::move(feats));
  out.labels = std::move(labels);
  out.classes = 2;
  out.feature_names = default_feature_names(2);
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += ch;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void ingest_fail(const std::filesystem::path& path, std::size_t row,
                              const std::string& column, const std::string& what) {
  std::ostringstream os;
  os << path.string() << ": row " << row;
  if (!column.empty()) os << ", column '" << column << "'";
  os << ": " << what;
  throw IngestionError(os.str());
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) ingest_fail(path, 0, "", "cannot open file");

  std::string line;
  if (!std::getline(in, line)) ingest_fail(path, 1, "", "missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  std::size_t label_idx = header.size();
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_idx = i;
  if (label_idx == header.size()) {
    ingest_fail(path, 1, label_column, "label column not found in header");
  }
  if (header.size() < 2) ingest_fail(path, 1, "", "need at least one feature column");

  Dataset out;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (i != label_idx) out.feature_names.push_back(header[i]);

  std::map<std::string, int> class_index;
  std::vector<double> feats;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      ingest_fail(path, row, "", "expected " + std::to_string(header.size()) + " cells, got " +
                                     std::to_string(cells.size()));
    }
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string cell = trim(cells[i]);
      if (i == label_idx) {
        auto [it, inserted] = class_index.emplace(cell, static_cast<int>(class_index.size()));
        if (inserted) out.class_names.push_back(cell);
        out.labels.push_back(it->second);
        continue;
      }
      double value = 0.0;
      const char* first = cell.data();
      const char* last = cell.data() + cell.size();
      if (!cell.empty() && *first == '+') ++first;
      const auto [ptr, ec] = std::from_chars(first, last, value);
      if (cell.empty() || ec != std::errc() || ptr != last) {
        ingest_fail(path, row, header[i], "non-numeric feature '" + cell + "'");
      }
      if (!std::isfinite(value)) {
        ingest_fail(path, row, header[i], "non-finite feature '" + cell + "'");
      }
      feats.push_back(value);
    }
  }
  if (out.labels.empty()) ingest_fail(path, row, "", "no data rows");
  out.classes = static_cast<int>(class_index.size());
  out.features = Tensor::from({out.labels.size(), header.size() - 1}, std::move(feats));
  return out;
}

void write_csv_dataset(const Dataset& data, const std::filesystem::path& path,
                       const std::string& label_column) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IngestionError(path.string() + ": cannot open for writing");
  const auto names =
      data.feature_names.size() == data.dim() ? data.feature_names : default_feature_names(data.dim());
  for (const auto& n : names) out << n << ',';
  out << label_column << '\n';
  char buf[32];
  for (std::size_t r = 0; r < data.size(); ++r) {
    for (std::size_t c = 0; c < data.dim(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), data.features.at(r, c));
      out.write(buf, res.ptr - buf);
      out << ',';
    }
    const int label = data.labels[r];
    if (static_cast<std::size_t>(label) < data.class_names.size()) {
      out << data.class_names[static_cast<std::size_t>(label)];
    } else {
      out << label;
    }
    out << '\n';
  }
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& data, double fraction,
                                          std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ParameterError("split must lie in (0, 1)");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
  n_train = std::clamp<std::size_t>(n_train, 1, idx.size() - 1);
  const std::span<const std::size_t> all(idx);
  return {data.subset(all.first(n_train)), data.subset(all.subspan(n_train))};
}

}  // namespace agr::harness
