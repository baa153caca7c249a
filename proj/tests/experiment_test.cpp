#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>

#include "rattn/experiment.hpp"
#include "rattn/io.hpp"
#include "rattn/synthetic.hpp"

using namespace rattn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rattn-exp-" + std::to_string(std::rand()) + "-" +
            std::to_string(reinterpret_cast<uintptr_t>(this)));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small enough to train in well under a second per seed.
ExperimentConfig tiny_config() {
  ExperimentConfig config = parse_config(
      "task.vocab = 40\n"
      "task.aspects = 3\n"
      "task.tokens_per_aspect = 3\n"
      "task.min_len = 6\n"
      "task.max_len = 10\n"
      "task.classes = 4\n"
      "task.train_examples = 120\n"
      "task.val_examples = 40\n"
      "task.test_examples = 40\n"
      "model.d = 6\n"
      "model.d_a = 6\n"
      "model.heads = 3\n"
      "train.epochs = 3\n"
      "train.rule = svgd\n"
      "run.seeds = 2\n");
  return config;
}

}  // namespace

TEST_CASE("variant_label names the rule and any regularizer") {
  TrainConfig train;
  train.sampler.rule = UpdateRule::plain;
  CHECK(variant_label(train) == "MA");
  train.sampler.rule = UpdateRule::svgd;
  CHECK(variant_label(train) == "RMA-SVGD");
  train.sampler.rule = UpdateRule::spos;
  CHECK(variant_label(train) == "RMA-SPOS");
  train.sampler.rule = UpdateRule::sgld;
  CHECK(variant_label(train) == "SGLD");

  train.sampler.rule = UpdateRule::plain;
  train.reg.kind = RegKind::frobenius;
  CHECK(variant_label(train) == "MA+F");
  train.reg.kind = RegKind::disagreement;
  CHECK(variant_label(train) == "MA+D");
  train.reg.kind = RegKind::cosine_param;
  train.reg.variant = CosineVariant::plain;
  CHECK(variant_label(train) == "MA+C:plain");
  train.reg.variant = CosineVariant::swap_ij;
  CHECK(variant_label(train) == "MA+C:swap");
  train.reg.variant = CosineVariant::swap_ij_smooth;
  CHECK(variant_label(train) == "MA+C:swap-smooth");
}

TEST_CASE("run_experiment writes the full report bundle") {
  TempDir tmp;
  const ExperimentConfig config = tiny_config();
  const ExperimentSummary summary = run_experiment(config, tmp.path / "run");

  CHECK(summary.rule == "svgd");
  CHECK(summary.variant == "RMA-SVGD");
  REQUIRE(summary.seeds.size() == 2);
  CHECK(summary.seeds[0].seed == 0);
  CHECK(summary.seeds[1].seed == 1);
  for (const SeedOutcome& outcome : summary.seeds) {
    CHECK(outcome.test_acc >= 0.0);
    CHECK(outcome.test_acc <= 1.0);
    CHECK(outcome.dist > 0.0);
  }
  REQUIRE(summary.aspects.count("acc") == 1);
  REQUIRE(summary.aspects.count("dist") == 1);
  const AspectSummary& acc = summary.aspects.at("acc");
  CHECK(acc.per_seed.size() == 2);
  CHECK(acc.mean ==
        doctest::Approx((acc.per_seed[0] + acc.per_seed[1]) / 2.0).epsilon(1e-12));

  for (const char* name :
       {"config.txt", "summary.json", "metrics.csv", "history.csv",
        "redundancy.csv", "calibration.csv", "entropy_cdf.csv",
        "checkpoint.json"}) {
    CAPTURE(name);
    CHECK(fs::exists(tmp.path / "run" / name));
  }
  CHECK(fs::exists(tmp.path / "run" / "attention" / "example_0.csv"));
  CHECK(fs::exists(tmp.path / "run" / "attention" / "example_2.csv"));

  // The recorded config reproduces the run's effective settings.
  const ExperimentConfig echoed =
      parse_config(read_text(tmp.path / "run" / "config.txt"));
  CHECK(echoed.train.m == 3);
  CHECK(echoed.seed_count == 2);

  // history.csv: (epochs + 1) rows per seed plus the header.
  const std::string history = read_text(tmp.path / "run" / "history.csv");
  const auto lines = static_cast<size_t>(
      std::count(history.begin(), history.end(), '\n'));
  CHECK(lines == 1 + 2 * (3 + 1));
}

TEST_CASE("run_experiment is deterministic") {
  TempDir tmp;
  const ExperimentConfig config = tiny_config();
  run_experiment(config, tmp.path / "a");
  run_experiment(config, tmp.path / "b");

  for (const char* name : {"summary.json", "metrics.csv", "history.csv",
                           "redundancy.csv", "checkpoint.json"}) {
    CAPTURE(name);
    CHECK(read_text(tmp.path / "a" / name) == read_text(tmp.path / "b" / name));
  }
}

TEST_CASE("run_experiment respects the metric toggles") {
  TempDir tmp;
  ExperimentConfig config = tiny_config();
  config.metrics.calibration = false;
  config.metrics.entropy = false;
  config.metrics.redundancy = false;
  const ExperimentSummary summary = run_experiment(config, tmp.path / "run");

  CHECK(!fs::exists(tmp.path / "run" / "calibration.csv"));
  CHECK(!fs::exists(tmp.path / "run" / "entropy_cdf.csv"));
  CHECK(summary.seeds[0].ece == 0.0);
  CHECK(summary.seeds[0].redundant_fraction == 0.0);
  CHECK(!fs::exists(tmp.path / "run" / "redundancy.csv"));
}

TEST_CASE("run_experiment stays inside its output directory") {
  TempDir tmp;
  const fs::path nested = tmp.path / "only" / "here";
  run_experiment(tiny_config(), nested);

  std::set<std::string> top;
  for (const auto& entry : fs::directory_iterator(tmp.path)) {
    top.insert(entry.path().filename().string());
  }
  CHECK(top == std::set<std::string>{"only"});
}

TEST_CASE("head_sweep covers rules x counts and agrees at one head") {
  TempDir tmp;
  ExperimentConfig config = tiny_config();
  config.seed_count = 2;
  const std::vector<Index> counts = {1, 2};
  const auto rows = head_sweep(config, counts, tmp.path);

  REQUIRE(rows.size() == 4);  // {plain, svgd} x {1, 2}
  std::set<std::string> seen;
  for (const SweepRow& row : rows) {
    seen.insert(row.rule + "-m" + std::to_string(row.heads));
    CHECK(fs::exists(tmp.path / ("sweep-" + row.rule + "-m" +
                                 std::to_string(row.heads)) / "summary.json"));
    CHECK(row.mean_val_error >= 0.0);
    CHECK(row.mean_val_error <= 1.0);
  }
  CHECK(seen == std::set<std::string>{"plain-m1", "plain-m2", "svgd-m1", "svgd-m2"});
  CHECK(fs::exists(tmp.path / "head_sweep.csv"));

  // One particle feels no repulsion: plain and svgd coincide exactly.
  double plain_m1 = -1.0, svgd_m1 = -1.0;
  for (const SweepRow& row : rows) {
    if (row.heads == 1 && row.rule == "plain") plain_m1 = row.mean_val_error;
    if (row.heads == 1 && row.rule == "svgd") svgd_m1 = row.mean_val_error;
  }
  CHECK(plain_m1 == svgd_m1);
}

TEST_CASE("head_sweep rejects an empty count list") {
  TempDir tmp;
  CHECK_THROWS_AS(head_sweep(tiny_config(), {}, tmp.path), std::invalid_argument);
}

TEST_CASE("render_report builds one aligned row per summary") {
  TempDir tmp;
  ExperimentConfig config = tiny_config();
  run_experiment(config, tmp.path / "svgd-run");
  config.train.sampler.rule = UpdateRule::plain;
  run_experiment(config, tmp.path / "plain-run");

  const std::string table = render_report(
      {tmp.path / "svgd-run", tmp.path / "plain-run" / "summary.json"},
      tmp.path / "report");
  CHECK(table.find("RMA-SVGD") != std::string::npos);
  CHECK(table.find("MA") != std::string::npos);
  CHECK(table.find("acc") != std::string::npos);
  CHECK(table.find("dist") != std::string::npos);
  CHECK(fs::exists(tmp.path / "report" / "table.csv"));
  CHECK(fs::exists(tmp.path / "report" / "table.txt"));
  CHECK(read_text(tmp.path / "report" / "table.txt") == table);

  CHECK_THROWS(render_report({tmp.path / "nowhere"}, tmp.path / "r2"));
}
