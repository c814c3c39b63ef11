// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/harness/train.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "agr/errors.hpp"
#include "agr/optim.hpp"
#include "agr/rng.hpp"
#include "json.hpp"

namespace agr::harness {

using ojson = nlohmann::ordered_json;

std::string TrainRecord::to_json() const {
  ojson j;
  j["run_id"] = run_id;
  j["seed"] = seed;
  j["epoch"] = epoch;
  j["train_loss"] = train_loss;
  j["test_acc"] = test_acc;
  j["wall_ms"] = wall_ms;
  j["agr_active"] = agr_active;
  j["optimizer"] = optimizer;
  j["lr"] = lr;
  j["weight_decay"] = weight_decay;
  return j.dump();
}

double TrainResult::final_train_accuracy() const {
  return nn::accuracy(model.predict(train.features), train.labels);
}

void write_jsonl(std::ostream& out, const std::vector<TrainRecord>& records) {
  for (const auto& r : records) out << r.to_json() << '\n';
}

namespace {

Tensor gather_rows(const Tensor& features, std::span<const std::size_t> rows) {
  const std::size_t dim = features.cols();
  std::vector<double> out(rows.size() * dim);
  const auto src = features.data();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(src.begin() + static_cast<std::ptrdiff_t>(rows[r] * dim), dim,
                out.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  return Tensor::from({rows.size(), dim}, std::move(out));
}

double test_accuracy(const nn::Mlp& model, const Dataset& test) {
  return nn::accuracy(model.predict(test.features), test.labels);
}

}  // namespace

TrainResult train_loop(const ExperimentConfig& cfg) {
  return train_loop(cfg, materialize_dataset(cfg));
}

TrainResult train_loop(const ExperimentConfig& cfg, const Dataset& data) {
  cfg.validate();
  if (cfg.widths.front() != data.dim()) {
    throw ConfigError("model input width " + std::to_string(cfg.widths.front()) +
                      " does not match dataset dimension " + std::to_string(data.dim()));
  }
  if (cfg.widths.back() < static_cast<std::size_t>(data.classes)) {
    throw ConfigError("model output width " + std::to_string(cfg.widths.back()) +
                      " is smaller than the class count " + std::to_string(data.classes));
  }

  auto [train, test] = split_dataset(data, cfg.split, derive_seed(cfg.seed, "split"));
  if (train.size() == 0 || test.size() == 0) {
    throw ConfigError("split leaves an empty train or test set");
  }

  TrainResult result{.records = {},
                     .model = nn::Mlp::init(cfg.widths, cfg.activation,
                                            derive_seed(cfg.seed, "init")),
                     .train = std::move(train),
                     .test = std::move(test),
                     .agr_applications = {},
                     .initial_test_acc = 0.0};
  nn::Mlp& model = result.model;
  result.initial_test_acc = test_accuracy(model, result.test);

  // lr = 0 freezes the model; the optimizer itself requires a positive rate.
  const bool frozen = cfg.optimizer.lr == 0.0;
  std::optional<Optimizer> optimizer;
  if (!frozen) optimizer.emplace(cfg.optimizer);

  const std::uint64_t shuffle_seed = derive_seed(cfg.seed, "shuffle");
  const std::string opt_name(kind_name(cfg.optimizer.kind));
  std::vector<std::size_t> order(result.train.size());

  for (std::uint64_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const double multiplier =
        cfg.lr_schedule == LrSchedule::kLinear
            ? 1.0 - static_cast<double>(epoch) / static_cast<double>(cfg.epochs)
            : 1.0;
    const std::uint64_t applied_before = optimizer ? optimizer->agr_applications() : 0;

    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(shuffle_seed, epoch));
    rng.shuffle(std::span<std::size_t>(order));

    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const std::span<const std::size_t> rows(order.data() + begin, end - begin);
      const Tensor batch = gather_rows(result.train.features, rows);
      std::vector<int> labels(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i) labels[i] = result.train.labels[rows[i]];

      const Tensor logits = model.forward(batch);
      const auto loss = nn::softmax_cross_entropy(logits, labels);
      loss_sum += loss.loss * static_cast<double>(rows.size());
      const auto grads = model.backward(loss.grad);
      if (frozen) continue;

      std::vector<Optimizer::Param> params;
      params.reserve(grads.size() * 2);
      auto& layers = model.layers();
      for (std::size_t l = 0; l < layers.size(); ++l) {
        params.push_back({&layers[l].weight, &grads[l].weight, ParamRole::kDenseWeight});
        params.push_back({&layers[l].bias, &grads[l].bias, ParamRole::kBias});
      }
      optimizer->step(params, epoch, multiplier);
    }

    TrainRecord rec;
    rec.run_id = cfg.run_id;
    rec.seed = cfg.seed;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    rec.test_acc = test_accuracy(model, result.test);
    rec.agr_active = should_apply(ParamRole::kDenseWeight, cfg.optimizer.agr, epoch);
    rec.optimizer = opt_name;
    rec.lr = cfg.optimizer.lr * multiplier;
    rec.weight_decay = cfg.optimizer.weight_decay;
    if (cfg.record_timing) {
      rec.wall_ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
    }
    result.records.push_back(std::move(rec));
    result.agr_applications.push_back(
        (optimizer ? optimizer->agr_applications() : 0) - applied_before);
  }
  return result;
}

namespace {

struct RunSpec {
  ExperimentConfig cfg;
  std::size_t arm = 0;
};

ArmSummary summarize(const std::string& label, const std::vector<const TrainResult*>& runs) {
  ArmSummary s;
  s.label = label;
  s.runs = runs.size();
  if (runs.empty()) return s;
  const std::size_t epochs = runs.front()->records.size();
  s.mean_loss_curve.assign(epochs, 0.0);
  for (const auto* r : runs) {
    s.final_train_loss.push_back(r->records.back().train_loss);
    s.final_test_acc.push_back(r->records.back().test_acc);
    for (std::size_t e = 0; e < epochs; ++e) s.mean_loss_curve[e] += r->records[e].train_loss;
  }
  const double n = static_cast<double>(runs.size());
  for (auto& v : s.mean_loss_curve) v /= n;
  s.mean_final_train_loss =
      std::accumulate(s.final_train_loss.begin(), s.final_train_loss.end(), 0.0) / n;
  s.mean_final_test_acc =
      std::accumulate(s.final_test_acc.begin(), s.final_test_acc.end(), 0.0) / n;
  return s;
}

ojson arm_json(const ArmSummary& a) {
  ojson j;
  j["label"] = a.label;
  j["runs"] = a.runs;
  j["mean_final_train_loss"] = a.mean_final_train_loss;
  j["mean_final_test_acc"] = a.mean_final_test_acc;
  j["final_train_loss"] = a.final_train_loss;
  j["final_test_acc"] = a.final_test_acc;
  j["mean_loss_curve"] = a.mean_loss_curve;
  return j;
}

ojson paired_json(const PairedSummary& p) {
  ojson j;
  j["agr"] = arm_json(p.agr);
  j["vanilla"] = arm_json(p.vanilla);
  j["loss_ratio"] = p.loss_ratio;
  j["loss_delta"] = p.loss_delta;
  j["test_acc_delta"] = p.test_acc_delta;
  return j;
}

}  // namespace

std::string PairedSummary::to_json() const { return paired_json(*this).dump(2); }

std::string ExperimentOutput::summary_json() const {
  ojson j;
  j["arms"] = ojson::array();
  for (const auto& a : arms) j["arms"].push_back(arm_json(a));
  if (paired) j["paired"] = paired_json(*paired);
  return j.dump(2);
}

ExperimentOutput run_experiment(const ExperimentConfig& cfg, bool paired,
                                std::size_t repeats, std::size_t workers) {
  cfg.validate();
  if (repeats < 1) throw ConfigError("repeats must be at least 1");

  // The dataset is shared by every run; only init, split and order vary by seed.
  const Dataset data = materialize_dataset(cfg);

  std::vector<RunSpec> specs;
  for (std::size_t r = 0; r < repeats; ++r) {
    ExperimentConfig base = cfg;
    base.seed = cfg.seed + r;
    if (!base.data_seed) base.data_seed = cfg.seed;
    if (paired) {
      ExperimentConfig on = base;
      on.run_id = base.run_id + "-agr";
      on.optimizer.agr.enabled = true;
      ExperimentConfig off = base;
      off.run_id = base.run_id + "-vanilla";
      off.optimizer.agr.enabled = false;
      specs.push_back({std::move(on), 0});
      specs.push_back({std::move(off), 1});
    } else {
      specs.push_back({std::move(base), 0});
    }
  }

  std::vector<std::optional<TrainResult>> results(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      try {
        results[i] = train_loop(specs[i].cfg, data);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t threads = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
  threads = std::min(threads, specs.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentOutput out;
  std::vector<const TrainResult*> arm0, arm1;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& recs = results[i]->records;
    out.records.insert(out.records.end(), recs.begin(), recs.end());
    (specs[i].arm == 0 ? arm0 : arm1).push_back(&*results[i]);
  }
  if (paired) {
    PairedSummary p;
    p.agr = summarize(cfg.run_id + "-agr", arm0);
    p.vanilla = summarize(cfg.run_id + "-vanilla", arm1);
    p.loss_ratio = p.vanilla.mean_final_train_loss > 0.0
                       ? p.agr.mean_final_train_loss / p.vanilla.mean_final_train_loss
                       : (p.agr.mean_final_train_loss == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
    p.loss_delta = p.agr.mean_final_train_loss - p.vanilla.mean_final_train_loss;
    p.test_acc_delta = p.agr.mean_final_test_acc - p.vanilla.mean_final_test_acc;
    out.arms = {p.agr, p.vanilla};
    out.paired = std::move(p);
  } else {
    out.arms = {summarize(cfg.run_id, arm0)};
  }
  return out;
}

}  // namespace agr::harness
