// Copyright 2026 The AGR Authors
// SPDX-License-Identifier: Apache-2.0

#include "agr/harness/cli.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>

#include "CLI11.hpp"
#include "agr/errors.hpp"
#include "agr/harness/bench.hpp"
#include "agr/harness/config.hpp"
#include "agr/harness/dataset.hpp"
#include "agr/harness/train.hpp"
#include "agr/verify.hpp"

namespace agr::harness {

namespace {

struct TrainArgs {
  std::string config;
  bool paired = false;
  std::size_t repeats = 1;
  std::string out;
  std::string summary;
  bool no_timing = false;
  std::size_t workers = 0;
};

struct VerifyArgs {
  std::string suite = "all";
  std::uint64_t trials = 10000;
  std::uint64_t seed = 42;
  std::string report;
};

struct BenchArgs {
  std::string config;
  std::size_t steps = 1000;
  bool self_compare = false;
};

struct GenArgs {
  std::string kind;
  std::size_t n = 200;
  int classes = 2;
  std::size_t dim = 2;
  double spread = 1.0;
  double noise = 0.1;
  std::uint64_t seed = 42;
  std::string out;
};

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError(path.string() + ": cannot open for writing");
  return f;
}

int run_train(const TrainArgs& a, std::ostream& out) {
  ExperimentConfig cfg = load_experiment(a.config);
  if (!a.out.empty()) cfg.output = a.out;
  if (a.no_timing) cfg.record_timing = false;
  const ExperimentOutput result = run_experiment(cfg, a.paired, a.repeats, a.workers);

  {
    auto f = open_output(cfg.output);
    write_jsonl(f, result.records);
  }
  std::filesystem::path summary = a.summary;
  if (summary.empty()) {
    summary = cfg.output;
    summary.replace_extension(".summary.json");
  }
  {
    auto f = open_output(summary);
    f << result.summary_json() << '\n';
  }

  out << "wrote " << result.records.size() << " records to " << cfg.output.string() << '\n';
  for (const auto& arm : result.arms) {
    out << arm.label << ": final train loss " << arm.mean_final_train_loss
        << ", test acc " << arm.mean_final_test_acc << " (" << arm.runs << " runs)\n";
  }
  if (result.paired) {
    out << "agr/vanilla loss ratio " << result.paired->loss_ratio << ", test acc delta "
        << result.paired->test_acc_delta << '\n';
  }
  return kExitOk;
}

int run_verify(const VerifyArgs& a, std::ostream& out) {
  const auto suite = verify::parse_suite(a.suite);
  if (!suite) throw ConfigError("unknown suite '" + a.suite + "'");
  verify::TrialConfig cfg;
  cfg.trials = a.trials;
  cfg.seed = a.seed;
  cfg.validate();
  const verify::VerifyReport report = verify::run_suite(cfg, *suite);
  for (const auto& c : report.checks) {
    out << (c.passed() ? "PASS " : "FAIL ") << std::left << std::setw(36) << c.name
        << " trials=" << c.trials << " failures=" << c.failures
        << " worst_margin=" << c.worst_margin << (c.informational ? " (info)" : "") << '\n';
    if (!c.passed() && c.example) out << "     e.g. " << *c.example << '\n';
  }
  if (!a.report.empty()) {
    auto f = open_output(a.report);
    f << report.to_json() << '\n';
  }
  return report.passed() ? kExitOk : kExitCheckFailed;
}

int run_bench(const BenchArgs& a, std::ostream& out) {
  const ExperimentConfig cfg = load_experiment(a.config);
  const OverheadResult r = bench_overhead(cfg, a.steps, a.self_compare);
  out << r.to_json() << '\n';
  return kExitOk;
}

int run_gen(const GenArgs& a, std::ostream& out) {
  Dataset data;
  if (a.kind == "blobs") {
    data = generate_blobs({a.n, a.classes, a.dim, a.spread}, a.seed);
  } else {
    data = generate_moons(a.n, a.noise, a.seed);
  }
  write_csv_dataset(data, a.out);
  out << "wrote " << data.size() << " rows to " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Adaptive gradient regularization: training, verification, benchmarks"};
  app.name("agr");
  app.require_subcommand(1);

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Train an MLP from an experiment file");
  train_cmd->add_option("--config", train.config, "Experiment file")->required();
  train_cmd->add_flag("--paired", train.paired, "Run AGR-on and AGR-off arms per seed");
  train_cmd->add_option("--repeats", train.repeats, "Seeds to run")->check(CLI::PositiveNumber);
  train_cmd->add_option("--out", train.out, "JSONL output (overrides the config)");
  train_cmd->add_option("--summary", train.summary, "Summary JSON path");
  train_cmd->add_flag("--no-timing", train.no_timing, "Write wall_ms = 0");
  train_cmd->add_option("--workers", train.workers, "Worker threads (0 = all cores)");

  VerifyArgs ver;
  auto* verify_cmd = app.add_subcommand("verify", "Run property checks");
  verify_cmd->add_option("--suite", ver.suite, "all|theorem41|theorem42|placement|gradcheck")
      ->check(CLI::IsMember({"all", "theorem41", "theorem42", "placement", "gradcheck"}));
  verify_cmd->add_option("--trials", ver.trials, "Random trials")->check(CLI::PositiveNumber);
  verify_cmd->add_option("--seed", ver.seed, "Seed");
  verify_cmd->add_option("--report", ver.report, "JSON report path");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Measure AGR step overhead");
  bench_cmd->add_option("--config", bench.config, "Experiment file")->required();
  bench_cmd->add_option("--steps", bench.steps, "Timed steps per arm")->check(CLI::Range(100, 100000000));
  bench_cmd->add_flag("--self-compare", bench.self_compare, "Both arms AGR-off");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Write a synthetic dataset as CSV");
  gen_cmd->add_option("--kind", gen.kind, "blobs|moons")
      ->required()
      ->check(CLI::IsMember({"blobs", "moons"}));
  gen_cmd->add_option("--n", gen.n, "Rows");
  gen_cmd->add_option("--classes", gen.classes, "Classes (blobs)");
  gen_cmd->add_option("--dim", gen.dim, "Feature dimension (blobs)");
  gen_cmd->add_option("--spread", gen.spread, "Blob standard deviation");
  gen_cmd->add_option("--noise", gen.noise, "Moons noise");
  gen_cmd->add_option("--seed", gen.seed, "Seed");
  gen_cmd->add_option("--out", gen.out, "CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : {train_cmd, verify_cmd, bench_cmd, gen_cmd})
      if (sub->parsed()) failing = sub;
    err << failing->help();
    return kExitUsage;
  }

  try {
    if (train_cmd->parsed()) return run_train(train, out);
    if (verify_cmd->parsed()) return run_verify(ver, out);
    if (bench_cmd->parsed()) return run_bench(bench, out);
    return run_gen(gen, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IngestionError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParameterError& e) {
    err << "invalid parameter: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
}

}  // namespace agr::harness
