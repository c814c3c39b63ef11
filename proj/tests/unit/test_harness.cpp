#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "agr/errors.hpp"
#include "agr/harness/bench.hpp"
#include "agr/harness/cli.hpp"
#include "agr/harness/config.hpp"
#include "agr/harness/dataset.hpp"
#include "agr/harness/train.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
namespace h = agr::harness;

namespace {

fs::path tmp(const std::string& name) {
  const fs::path dir = fs::path(AGR_TEST_TMP) / "harness";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "agr");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = h::cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str() + err.str();
  return code;
}

h::ExperimentConfig blobs_config(std::size_t epochs) {
  h::ExperimentConfig cfg;
  cfg.widths = {2, 8, 2};
  cfg.dataset = h::BlobsParams{200, 2, 2, 0.5};
  cfg.epochs = epochs;
  cfg.record_timing = false;
  cfg.optimizer.lr = 0.01;
  return cfg;
}

}  // namespace

TEST(Datasets, BlobsDeterministicAndBalanced) {
  const auto a = h::generate_blobs({100, 2, 2, 1.0}, 1);
  const auto b = h::generate_blobs({100, 2, 2, 1.0}, 1);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  const auto c = h::generate_blobs({101, 3, 5, 1.0}, 2);
  std::vector<int> counts(3);
  for (int l : c.labels) ++counts[l];
  EXPECT_LE(*std::max_element(counts.begin(), counts.end()) -
                *std::min_element(counts.begin(), counts.end()),
            1);
  EXPECT_EQ(c.dim(), 5u);
  EXPECT_THROW(h::generate_blobs({1, 2, 2, 1.0}, 1), agr::ParameterError);
}

TEST(Datasets, MoonsBalanced) {
  const auto m = h::generate_moons(1000, 0.1, 3);
  EXPECT_EQ(std::count(m.labels.begin(), m.labels.end(), 0), 500);
  EXPECT_EQ(std::count(m.labels.begin(), m.labels.end(), 1), 500);
}

TEST(Datasets, SplitIsDeterministicPartition) {
  const auto d = h::generate_moons(100, 0.1, 1);
  const auto [tr, te] = h::split_dataset(d, 0.8, 5);
  EXPECT_EQ(tr.size(), 80u);
  EXPECT_EQ(te.size(), 20u);
  const auto [tr2, te2] = h::split_dataset(d, 0.8, 5);
  EXPECT_EQ(tr.features, tr2.features);
}

TEST(Csv, LabelsMapInFirstAppearanceOrder) {
  const auto p = tmp("abc.csv");
  write_file(p, "x,y,label\n1,2,a\n3,4,b\n5,6,a\n");
  const auto d = h::load_csv_dataset(p, "label");
  EXPECT_EQ(d.labels, (std::vector<int>{0, 1, 0}));
  EXPECT_EQ(d.class_names, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.features, agr::Tensor::from({3, 2}, {1, 2, 3, 4, 5, 6}));
}

TEST(Csv, LabelColumnAnywhere) {
  const auto p = tmp("mid.csv");
  write_file(p, "x,cls,y\n1,dog,2\n3,cat,4\n");
  const auto d = h::load_csv_dataset(p, "cls");
  EXPECT_EQ(d.feature_names, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(d.features, agr::Tensor::from({2, 2}, {1, 2, 3, 4}));
}

TEST(Csv, ErrorsNameLocation) {
  const auto p = tmp("nan.csv");
  write_file(p, "x,y,label\n1,2,a\n3,NaN,b\n");
  try {
    h::load_csv_dataset(p, "label");
    FAIL() << "expected IngestionError";
  } catch (const agr::IngestionError& e) {
    EXPECT_NE(std::string(e.what()).find("row 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("'y'"), std::string::npos) << e.what();
  }
  write_file(p, "x,y,label\n1,abc,a\n");
  EXPECT_THROW(h::load_csv_dataset(p, "label"), agr::IngestionError);
  EXPECT_THROW(h::load_csv_dataset(p, "target"), agr::IngestionError);
  EXPECT_THROW(h::load_csv_dataset(tmp("absent.csv"), "label"), agr::IngestionError);
}

TEST(Csv, RoundTrip) {
  const auto d = h::generate_blobs({50, 3, 4, 1.5}, 9);
  const auto p = tmp("round.csv");
  h::write_csv_dataset(d, p);
  const auto r = h::load_csv_dataset(p, "label");
  ASSERT_EQ(r.features.shape(), d.features.shape());
  for (std::size_t i = 0; i < d.features.size(); ++i) {
    EXPECT_NEAR(r.features[i], d.features[i], 1e-12);
  }
  EXPECT_EQ(r.labels, d.labels);
}

TEST(Config, ParsesSectionsAndTypes) {
  const auto f = h::KeyValueFile::parse(R"(
run_id = "demo"   # trailing comment
seed = 7
[model]
layers = [2, 16, 2]
activation = "tanh"
[dataset]
kind = "blobs"
n = 120
classes = 2
spread = 0.25
[optimizer]
kind = "adan"
weight_decay = 0.02
centralize = true
[agr]
enabled = true
until_epoch = 3
roles = ["dense_weight", "bias"]
)");
  const auto cfg = h::experiment_from_file(f);
  EXPECT_EQ(cfg.run_id, "demo");
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.widths, (std::vector<std::size_t>{2, 16, 2}));
  EXPECT_EQ(cfg.activation, agr::nn::Activation::kTanh);
  const auto& blobs = std::get<h::BlobsParams>(cfg.dataset);
  EXPECT_EQ(blobs.n, 120u);
  EXPECT_EQ(blobs.spread, 0.25);
  EXPECT_EQ(cfg.optimizer.kind, agr::OptimizerKind::kAdan);
  EXPECT_EQ(cfg.optimizer.beta1, 0.02);
  EXPECT_EQ(cfg.optimizer.weight_decay, 0.02);
  EXPECT_TRUE(cfg.optimizer.centralize);
  EXPECT_TRUE(cfg.optimizer.agr.enabled);
  EXPECT_EQ(cfg.optimizer.agr.until_epoch, 3u);
  EXPECT_TRUE(cfg.optimizer.agr.eligible_roles.contains(agr::ParamRole::kBias));
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(h::experiment_from_file(h::KeyValueFile::parse("epochs = 0\n")), agr::ConfigError);
  EXPECT_THROW(h::experiment_from_file(h::KeyValueFile::parse("split = 1.0\n")), agr::ConfigError);
  EXPECT_THROW(h::experiment_from_file(h::KeyValueFile::parse("colour = 1\n")), agr::ConfigError);
  EXPECT_THROW(h::experiment_from_file(h::KeyValueFile::parse("seed = abc\n")), agr::ConfigError);
  EXPECT_THROW(h::KeyValueFile::parse("just text\n"), agr::ConfigError);
  EXPECT_THROW(h::KeyValueFile::parse("a = 1\na = 2\n"), agr::ConfigError);
  EXPECT_THROW(h::experiment_from_file(h::KeyValueFile::parse("[optimizer]\nkind = \"lion\"\n")),
               agr::ConfigError);
  try {
    h::experiment_from_file(h::KeyValueFile::parse("\n[optimizer]\nlr = fast\n", "exp.toml"));
    FAIL();
  } catch (const agr::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("exp.toml:3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("optimizer.lr"), std::string::npos) << e.what();
  }
}

TEST(Train, DeterministicRecords) {
  const auto cfg = blobs_config(5);
  const auto a = h::train_loop(cfg);
  const auto b = h::train_loop(cfg);
  ASSERT_EQ(a.records.size(), 5u);
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].to_json(), b.records[i].to_json());
    EXPECT_EQ(a.records[i].epoch, i);
    EXPECT_GE(a.records[i].train_loss, 0.0);
  }
}

TEST(Train, ZeroLearningRateLeavesModelUntrained) {
  auto cfg = blobs_config(1);
  cfg.optimizer.lr = 0.0;
  const auto r = h::train_loop(cfg);
  EXPECT_EQ(r.records.front().test_acc, r.initial_test_acc);
  auto cfg3 = cfg;
  cfg3.epochs = 3;
  const auto r3 = h::train_loop(cfg3);
  for (const auto& rec : r3.records) {
    EXPECT_NEAR(rec.train_loss, r3.records.front().train_loss, 1e-12);
  }
}

TEST(Train, SeparableBlobsReachFullTrainAccuracy) {
  h::ExperimentConfig cfg;
  cfg.widths = {2, 8, 2};
  cfg.dataset = h::BlobsParams{200, 2, 2, 0.0};
  cfg.epochs = 50;
  cfg.record_timing = false;
  const auto r = h::train_loop(cfg);
  EXPECT_EQ(r.final_train_accuracy(), 1.0);
}

TEST(Train, RecordsCarryScheduleAndSchema) {
  auto cfg = blobs_config(4);
  cfg.optimizer.agr = agr::AgrSchedule::on();
  cfg.optimizer.agr.until_epoch = 2;
  cfg.lr_schedule = h::LrSchedule::kLinear;
  const auto r = h::train_loop(cfg);
  EXPECT_TRUE(r.records[1].agr_active);
  EXPECT_FALSE(r.records[2].agr_active);
  EXPECT_GT(r.agr_applications[1], 0u);
  EXPECT_EQ(r.agr_applications[2], 0u);
  EXPECT_EQ(r.agr_applications[3], 0u);
  EXPECT_DOUBLE_EQ(r.records[2].lr, 0.005);

  const auto j = nlohmann::ordered_json::parse(r.records[0].to_json());
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"run_id", "seed", "epoch", "train_loss", "test_acc",
                                            "wall_ms", "agr_active", "optimizer", "lr",
                                            "weight_decay"}));
}

TEST(Train, MismatchedWidthsRejected) {
  auto cfg = blobs_config(1);
  cfg.widths = {3, 8, 2};
  EXPECT_THROW(h::train_loop(cfg), agr::ConfigError);
}

TEST(Experiment, PairedRunsShareInitialization) {
  auto cfg = blobs_config(3);
  const auto out = h::run_experiment(cfg, true, 2, 2);
  ASSERT_EQ(out.records.size(), 12u);
  EXPECT_EQ(out.records[0].run_id, cfg.run_id + "-agr");
  EXPECT_EQ(out.records[3].run_id, cfg.run_id + "-vanilla");
  EXPECT_EQ(out.records[6].seed, cfg.seed + 1);
  ASSERT_TRUE(out.paired.has_value());
  EXPECT_EQ(out.paired->agr.runs, 2u);
  const auto again = h::run_experiment(cfg, true, 2, 1);
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    EXPECT_EQ(out.records[i].to_json(), again.records[i].to_json());
  }
  const auto j = nlohmann::json::parse(out.summary_json());
  EXPECT_TRUE(j["paired"].contains("loss_delta"));
  EXPECT_TRUE(j["paired"].contains("test_acc_delta"));
}

TEST(Bench, MinimalRunAndStepFloor) {
  auto cfg = blobs_config(1);
  const auto r = h::bench_overhead(cfg, 100);
  EXPECT_GT(r.vanilla_ns_per_step, 0.0);
  EXPECT_GT(r.agr_ns_per_step, 0.0);
  EXPECT_THROW(h::bench_overhead(cfg, 99), agr::ParameterError);
}

TEST(Cli, ExitCodes) {
  const auto cfg_path = tmp("exp.toml");
  write_file(cfg_path, "epochs = 2\n[model]\nlayers = [2, 8, 2]\n[dataset]\nkind = \"moons\"\nn = 100\n");
  const auto out_path = tmp("run.jsonl");
  std::string text;
  EXPECT_EQ(run_cli({"train", "--config", cfg_path.string(), "--out", out_path.string(),
                     "--no-timing"}),
            h::kExitOk);
  const std::string first = read_file(out_path);
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 2);
  EXPECT_EQ(run_cli({"train", "--config", cfg_path.string(), "--out", out_path.string(),
                     "--no-timing"}),
            h::kExitOk);
  EXPECT_EQ(read_file(out_path), first);

  EXPECT_EQ(run_cli({"train", "--config", tmp("missing.toml").string()}), h::kExitUsage);
  EXPECT_EQ(run_cli({"train", "--config", cfg_path.string(), "--frobnicate"}, &text),
            h::kExitUsage);
  EXPECT_NE(text.find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}), h::kExitUsage);
  EXPECT_EQ(run_cli({"verify", "--suite", "placement", "--trials", "5"}), h::kExitOk);
  EXPECT_EQ(run_cli({"verify", "--suite", "nonsense"}), h::kExitUsage);
  EXPECT_EQ(run_cli({"gen-data", "--kind", "moons", "--n", "20", "--out",
                     tmp("moons.csv").string()}),
            h::kExitOk);
  EXPECT_EQ(h::load_csv_dataset(tmp("moons.csv"), "label").size(), 20u);
}
