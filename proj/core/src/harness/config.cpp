// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agr/errors.hpp"

namespace agr::harness {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

// Drops a trailing "# comment" that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_key(std::string_view key) {
  return !key.empty() && std::all_of(key.begin(), key.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
  });
}

}  // namespace

KeyValueFile KeyValueFile::parse(const std::string& text, const std::string& origin) {
  KeyValueFile file;
  file.origin_ = origin;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  auto fail_line = [&](const std::string& what) {
    throw ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[' && line.find('=') == std::string::npos) {
      if (line.back() != ']') fail_line("unterminated section header");
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (!valid_key(section)) fail_line("invalid section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_line("expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (!valid_key(key)) fail_line("invalid key '" + key + "'");
    if (value.empty()) fail_line("missing value for '" + key + "'");

    Entry entry;
    entry.line = line_no;
    if (value.front() == '"') {
      if (value.size() < 2 || value.back() != '"') fail_line("unterminated string for '" + key + "'");
      entry.text = value.substr(1, value.size() - 2);
      entry.quoted = true;
    } else if (value.front() == '[') {
      if (value.back() != ']') fail_line("unterminated list for '" + key + "'");
      entry.text = value.substr(1, value.size() - 2);
      entry.list = true;
    } else {
      entry.text = value;
    }
    const std::string full = section.empty() ? key : section + "." + key;
    if (file.values_.contains(full)) fail_line("duplicate key '" + full + "'");
    file.values_.emplace(full, std::move(entry));
    file.order_.push_back(full);
  }
  return file;
}

KeyValueFile KeyValueFile::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const KeyValueFile::Entry* KeyValueFile::entry(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

void KeyValueFile::fail(const std::string& key, const std::string& what) const {
  const Entry* e = entry(key);
  throw ConfigError(origin_ + (e ? ":" + std::to_string(e->line) : std::string()) + ": key '" +
                    key + "': " + what);
}

std::optional<std::string> KeyValueFile::get_string(const std::string& key) const {
  const Entry* e = entry(key);
  if (!e) return std::nullopt;
  if (e->list) fail(key, "expected a scalar, got a list");
  return e->text;
}

std::optional<double> KeyValueFile::get_double(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size() || !std::isfinite(v)) {
    fail(key, "expected a number, got '" + *s + "'");
  }
  return v;
}

std::optional<std::int64_t> KeyValueFile::get_int(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
  if (ec != std::errc() || ptr != s->data() + s->size()) {
    fail(key, "expected an integer, got '" + *s + "'");
  }
  return v;
}

std::optional<bool> KeyValueFile::get_bool(const std::string& key) const {
  const auto s = get_string(key);
  if (!s) return std::nullopt;
  if (*s == "true") return true;
  if (*s == "false") return false;
  fail(key, "expected true or false, got '" + *s + "'");
}

std::optional<std::vector<std::string>> KeyValueFile::get_list(const std::string& key) const {
  const Entry* e = entry(key);
  if (!e) return std::nullopt;
  std::vector<std::string> items;
  std::string cur;
  std::istringstream in(e->text);
  while (std::getline(in, cur, ',')) {
    std::string item = trim(cur);
    if (item.size() >= 2 && item.front() == '"' && item.back() == '"') {
      item = item.substr(1, item.size() - 2);
    }
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::vector<std::string> KeyValueFile::unknown_keys(const std::vector<std::string>& known) const {
  std::vector<std::string> out;
  for (const auto& k : order_)
    if (std::find(known.begin(), known.end(), k) == known.end()) out.push_back(k);
  return out;
}

void ExperimentConfig::validate() const {
  if (widths.size() < 2) throw ConfigError("model.layers needs at least two widths");
  if (std::find(widths.begin(), widths.end(), 0u) != widths.end()) {
    throw ConfigError("model.layers widths must be positive");
  }
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (!(split > 0.0 && split < 1.0)) throw ConfigError("split must lie in (0, 1)");
  try {
    // lr = 0 is accepted here as a frozen run; train_loop then skips updates.
    OptimizerConfig check = optimizer;
    if (check.lr == 0.0) check.lr = 1.0;
    check.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("optimizer: ") + e.what());
  }
}

namespace {

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "run_id", "seed", "epochs", "batch_size", "split", "output", "lr_schedule",
      "model.layers", "model.activation",
      "dataset.kind", "dataset.n", "dataset.classes", "dataset.dim", "dataset.spread",
      "dataset.noise", "dataset.seed", "dataset.path", "dataset.label_column",
      "optimizer.kind", "optimizer.lr", "optimizer.beta1", "optimizer.beta2",
      "optimizer.beta3", "optimizer.eps", "optimizer.weight_decay", "optimizer.clip_norm",
      "optimizer.centralize", "optimizer.sgdm_dampening",
      "optimizer.adan_v_uses_regularized_prev",
      "agr.enabled", "agr.until_epoch", "agr.roles",
  };
  return keys;
}

std::size_t positive(const KeyValueFile& f, const std::string& key, std::size_t fallback) {
  const auto v = f.get_int(key);
  if (!v) return fallback;
  if (*v < 1) throw ConfigError(f.origin() + ": key '" + key + "' must be at least 1");
  return static_cast<std::size_t>(*v);
}

std::uint64_t non_negative(const KeyValueFile& f, const std::string& key, std::uint64_t fallback) {
  const auto v = f.get_int(key);
  if (!v) return fallback;
  if (*v < 0) throw ConfigError(f.origin() + ": key '" + key + "' must be non-negative");
  return static_cast<std::uint64_t>(*v);
}

}  // namespace

ExperimentConfig experiment_from_file(const KeyValueFile& f) {
  if (const auto unknown = f.unknown_keys(known_keys()); !unknown.empty()) {
    throw ConfigError(f.origin() + ": unknown key '" + unknown.front() + "'");
  }
  ExperimentConfig cfg;
  if (auto v = f.get_string("run_id")) cfg.run_id = *v;
  cfg.seed = non_negative(f, "seed", cfg.seed);
  cfg.epochs = positive(f, "epochs", cfg.epochs);
  cfg.batch_size = positive(f, "batch_size", cfg.batch_size);
  if (auto v = f.get_double("split")) cfg.split = *v;
  if (auto v = f.get_string("output")) cfg.output = *v;
  if (auto v = f.get_string("lr_schedule")) {
    if (*v == "constant") cfg.lr_schedule = LrSchedule::kConstant;
    else if (*v == "linear") cfg.lr_schedule = LrSchedule::kLinear;
    else throw ConfigError(f.origin() + ": lr_schedule must be constant or linear");
  }

  if (auto v = f.get_list("model.layers")) {
    cfg.widths.clear();
    for (const auto& item : *v) {
      std::size_t w = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), w);
      if (ec != std::errc() || ptr != item.data() + item.size() || w == 0) {
        throw ConfigError(f.origin() + ": model.layers entry '" + item + "' is not a positive integer");
      }
      cfg.widths.push_back(w);
    }
  }
  if (auto v = f.get_string("model.activation")) {
    const auto a = nn::parse_activation(*v);
    if (!a) throw ConfigError(f.origin() + ": unknown activation '" + *v + "'");
    cfg.activation = *a;
  }

  const std::string kind = f.get_string("dataset.kind").value_or("moons");
  if (kind == "moons") {
    MoonsSource m;
    m.n = positive(f, "dataset.n", m.n);
    if (auto v = f.get_double("dataset.noise")) m.noise = *v;
    cfg.dataset = m;
  } else if (kind == "blobs") {
    BlobsParams b;
    b.n = positive(f, "dataset.n", b.n);
    b.classes = static_cast<int>(positive(f, "dataset.classes", static_cast<std::size_t>(b.classes)));
    b.dim = positive(f, "dataset.dim", b.dim);
    if (auto v = f.get_double("dataset.spread")) b.spread = *v;
    cfg.dataset = b;
  } else if (kind == "csv") {
    CsvSource c;
    const auto path = f.get_string("dataset.path");
    if (!path) throw ConfigError(f.origin() + ": dataset.kind = csv needs dataset.path");
    c.path = *path;
    // Relative dataset paths resolve against the config file's directory.
    if (c.path.is_relative() && f.origin().front() != '<') {
      const auto base = std::filesystem::path(f.origin()).parent_path();
      if (!base.empty()) c.path = base / c.path;
    }
    if (auto v = f.get_string("dataset.label_column")) c.label_column = *v;
    cfg.dataset = c;
  } else {
    throw ConfigError(f.origin() + ": dataset.kind must be moons, blobs or csv");
  }
  if (f.has("dataset.seed")) cfg.data_seed = non_negative(f, "dataset.seed", 0);

  const std::string opt = f.get_string("optimizer.kind").value_or("adamw");
  const auto okind = parse_kind(opt);
  if (!okind) throw ConfigError(f.origin() + ": unknown optimizer '" + opt + "'");
  OptimizerConfig o = OptimizerConfig::defaults(*okind);
  if (auto v = f.get_double("optimizer.lr")) o.lr = *v;
  if (auto v = f.get_double("optimizer.beta1")) o.beta1 = *v;
  if (auto v = f.get_double("optimizer.beta2")) o.beta2 = *v;
  if (auto v = f.get_double("optimizer.beta3")) o.beta3 = *v;
  if (auto v = f.get_double("optimizer.eps")) o.eps = *v;
  if (auto v = f.get_double("optimizer.weight_decay")) o.weight_decay = *v;
  if (auto v = f.get_double("optimizer.clip_norm")) o.clip_norm = *v;
  if (auto v = f.get_bool("optimizer.centralize")) o.centralize = *v;
  if (auto v = f.get_bool("optimizer.sgdm_dampening")) o.sgdm_dampening = *v;
  if (auto v = f.get_bool("optimizer.adan_v_uses_regularized_prev")) {
    o.adan_v_uses_regularized_prev = *v;
  }
  if (auto v = f.get_bool("agr.enabled")) o.agr.enabled = *v;
  if (f.has("agr.until_epoch")) o.agr.until_epoch = non_negative(f, "agr.until_epoch", 0);
  if (auto v = f.get_list("agr.roles")) {
    o.agr.eligible_roles.clear();
    for (const auto& name : *v) {
      const auto role = parse_role(name);
      if (!role) throw ConfigError(f.origin() + ": unknown parameter role '" + name + "'");
      o.agr.eligible_roles.insert(*role);
    }
  }
  cfg.optimizer = std::move(o);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return experiment_from_file(KeyValueFile::load(path));
}

Dataset materialize_dataset(const ExperimentConfig& cfg) {
  const std::uint64_t seed = cfg.data_seed.value_or(cfg.seed);
  return std::visit(
      [&](const auto& src) -> Dataset {
        using T = std::decay_t<decltype(src)>;
        if constexpr (std::is_same_v<T, BlobsParams>) {
          return generate_blobs(src, seed);
        } else if constexpr (std::is_same_v<T, MoonsSource>) {
          return generate_moons(src.n, src.noise, seed);
        } else {
          return load_csv_dataset(src.path, src.label_column);
        }
      },
      cfg.dataset);
}

}  // namespace agr::harness
