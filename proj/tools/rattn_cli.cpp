#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rattn/config.hpp"
#include "rattn/experiment.hpp"
#include "rattn/io.hpp"
#include "rattn/synthetic.hpp"
#include "rattn/toy.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using namespace rattn;

namespace {

struct CommonFlags {
  std::string config_path;
  uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  std::string rule;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool need_out) {
  cmd->add_option("--config", flags.config_path, "key = value config file");
  cmd->add_option("--seed", flags.seed, "base RNG seed")
      ->each([&flags](const std::string&) { flags.seed_set = true; });
  auto* out = cmd->add_option("--out", flags.out_dir, "output directory");
  if (need_out) out->required();
  cmd->add_option("--rule", flags.rule, "update rule: plain, svgd, spos, or sgld");
}

ExperimentConfig load_config(const CommonFlags& flags) {
  ExperimentConfig config;
  if (!flags.config_path.empty()) {
    config = parse_config_file(flags.config_path);
  }
  if (flags.seed_set) {
    config.base_seed = flags.seed;
    config.task.seed = flags.seed;
  }
  if (!flags.rule.empty()) {
    config.train.sampler.rule = parse_rule(flags.rule);
  }
  return config;
}

// Trains a single model (or loads a checkpoint) for the analysis commands.
SentenceClassifier analysis_model(const ExperimentConfig& config,
                                  const std::string& checkpoint, Dataset& test_out) {
  if (!checkpoint.empty()) {
    return load_checkpoint(checkpoint);
  }
  const DataSplits splits = config.data_path.empty() ? gen_synthetic(config.task)
                                                     : read_splits(config.data_path);
  test_out = splits.test;
  TrainConfig tc = config.train;
  tc.seed = config.base_seed;
  // Analyze the model a user would deploy: the best-validation checkpoint.
  return train(tc, splits).model;
}

std::vector<Index> parse_counts(const std::string& csv) {
  std::vector<Index> counts;
  std::string field;
  std::istringstream in(csv);
  while (std::getline(in, field, ',')) {
    if (field.empty()) continue;
    counts.push_back(static_cast<Index>(std::stoll(field)));
  }
  if (counts.empty()) {
    throw std::invalid_argument("--counts lists no head counts");
  }
  return counts;
}

int cmd_gen_data(const CommonFlags& flags) {
  const ExperimentConfig config = load_config(flags);
  const DataSplits splits = gen_synthetic(config.task);
  write_splits(flags.out_dir, splits, config.task.aspects,
               config.task.tokens_per_aspect);
  write_text_atomic(fs::path(flags.out_dir) / "task.txt", render_config(config));
  std::printf("wrote %lld/%lld/%lld examples (vocab %lld, %lld classes) to %s\n",
              static_cast<long long>(splits.train.size()),
              static_cast<long long>(splits.val.size()),
              static_cast<long long>(splits.test.size()),
              static_cast<long long>(splits.train.vocab),
              static_cast<long long>(splits.train.classes), flags.out_dir.c_str());
  return 0;
}

int cmd_train(const CommonFlags& flags, int seeds_override) {
  ExperimentConfig config = load_config(flags);
  if (seeds_override > 0) config.seed_count = seeds_override;
  const ExperimentSummary summary = run_experiment(config, flags.out_dir);
  const AspectSummary& acc = summary.aspects.at("acc");
  const AspectSummary& dist = summary.aspects.at("dist");
  std::printf("%s (%s): acc %.4f +- %.4f, dist %.4f over %zu seed(s); report in %s\n",
              summary.variant.c_str(), summary.rule.c_str(), acc.mean, acc.stddev,
              dist.mean, summary.seeds.size(), flags.out_dir.c_str());
  return 0;
}

int cmd_sweep_heads(const CommonFlags& flags, const std::string& counts_csv) {
  const ExperimentConfig config = load_config(flags);
  const std::vector<Index> counts = parse_counts(counts_csv);
  const auto rows = head_sweep(config, counts, flags.out_dir);
  std::printf("%-6s %-6s %-14s %-14s %-10s\n", "rule", "heads", "mean_val_error",
              "std_val_error", "mean_dist");
  for (const SweepRow& row : rows) {
    std::printf("%-6s %-6lld %-14.4f %-14.4f %-10.4f\n", row.rule.c_str(),
                static_cast<long long>(row.heads), row.mean_val_error,
                row.std_val_error, row.mean_dist);
  }
  return 0;
}

int cmd_mask_analysis(const CommonFlags& flags, const std::string& checkpoint,
                      const std::string& data_dir) {
  ExperimentConfig config = load_config(flags);
  if (!data_dir.empty()) config.data_path = data_dir;
  Dataset test;
  const SentenceClassifier model = analysis_model(config, checkpoint, test);
  if (!checkpoint.empty()) {
    if (config.data_path.empty()) {
      throw std::invalid_argument("mask-analysis: --checkpoint needs --data");
    }
    test = read_splits(config.data_path).test;
  }
  const auto records = mask_analysis_model(model, test, flags.out_dir);
  std::printf("%-6s %-10s %-10s %-10s\n", "head", "baseline", "masked", "delta");
  for (const RedundancyRecord& rec : records) {
    std::printf("%-6lld %-10.4f %-10.4f %+-10.4f\n", static_cast<long long>(rec.head),
                rec.baseline, rec.masked, rec.delta);
  }
  return 0;
}

int cmd_calibrate(const CommonFlags& flags, const std::string& checkpoint,
                  const std::string& data_dir, int bins) {
  ExperimentConfig config = load_config(flags);
  if (!data_dir.empty()) config.data_path = data_dir;
  Dataset test;
  const SentenceClassifier model = analysis_model(config, checkpoint, test);
  if (!checkpoint.empty()) {
    if (config.data_path.empty()) {
      throw std::invalid_argument("calibrate: --checkpoint needs --data");
    }
    test = read_splits(config.data_path).test;
  }
  const CalibrationOutcome outcome = calibrate_model(model, test, flags.out_dir, bins);
  std::printf("ece %.6f, oe %.6f over %zu examples; tables in %s\n", outcome.ece,
              outcome.oe, outcome.cdf.entropy.size(), flags.out_dir.c_str());
  return 0;
}

int cmd_sample_toy(const CommonFlags& flags, const std::string& target,
                   Index particles, Index iterations, double stepsize, double alpha,
                   double init_mean, double init_spread) {
  ExperimentConfig base = load_config(flags);
  ToyConfig config;
  config.target = parse_toy_target(target);
  config.sampler = base.train.sampler;
  if (!flags.rule.empty()) config.sampler.rule = parse_rule(flags.rule);
  if (stepsize > 0.0) config.sampler.stepsize = stepsize;
  if (alpha >= 0.0) config.sampler.repulsive_weight = alpha;
  config.m = particles;
  config.iterations = iterations;
  config.seed = flags.seed;
  config.init_mean = init_mean;
  config.init_spread = init_spread;

  const ToyResult result = sample_toy(config);

  if (!flags.out_dir.empty()) {
    CsvTable csv;
    csv.header = {"particle", "position"};
    for (Index i = 0; i < result.particles.rows(); ++i) {
      csv.rows.push_back({std::to_string(i), format_double(result.particles(i, 0))});
    }
    write_csv(fs::path(flags.out_dir) / "particles.csv", csv);
    nlohmann::json j;
    j["target"] = toy_target_name(config.target);
    j["rule"] = rule_name(config.sampler.rule);
    j["mean"] = result.mean;
    j["variance"] = result.variance;
    j["left_count"] = result.left_count;
    j["right_count"] = result.right_count;
    write_text_atomic(fs::path(flags.out_dir) / "moments.json", j.dump(2) + "\n");
  }
  std::printf("%s via %s: mean %.4f, variance %.4f, %lld left / %lld right of 0\n",
              toy_target_name(config.target).c_str(),
              rule_name(config.sampler.rule).c_str(), result.mean, result.variance,
              static_cast<long long>(result.left_count),
              static_cast<long long>(result.right_count));
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& out_dir) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  std::fputs(render_report(paths, out_dir).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"repulsive multi-head attention workbench"};
  app.require_subcommand(1);

  CommonFlags gen_flags;
  auto* gen = app.add_subcommand("gen-data", "generate the synthetic task splits");
  add_common(gen, gen_flags, true);

  CommonFlags train_flags;
  int train_seeds = 0;
  auto* train_cmd = app.add_subcommand("train", "train and evaluate over the seed list");
  add_common(train_cmd, train_flags, true);
  train_cmd->add_option("--seeds", train_seeds, "override the number of seeds");

  CommonFlags sweep_flags;
  std::string sweep_counts = "1,2,4,8,16,32";
  auto* sweep = app.add_subcommand("sweep-heads", "error-vs-head-count sweep for plain and svgd");
  add_common(sweep, sweep_flags, true);
  sweep->add_option("--counts", sweep_counts, "comma-separated head counts");

  CommonFlags mask_flags;
  std::string mask_checkpoint, mask_data;
  auto* mask = app.add_subcommand("mask-analysis", "per-head masking accuracy deltas");
  add_common(mask, mask_flags, true);
  mask->add_option("--checkpoint", mask_checkpoint, "analyze this checkpoint instead of training");
  mask->add_option("--data", mask_data, "split directory (required with --checkpoint)");

  CommonFlags cal_flags;
  std::string cal_checkpoint, cal_data;
  int cal_bins = 10;
  auto* cal = app.add_subcommand("calibrate", "confidence calibration and entropy tables");
  add_common(cal, cal_flags, true);
  cal->add_option("--checkpoint", cal_checkpoint, "analyze this checkpoint instead of training");
  cal->add_option("--data", cal_data, "split directory (required with --checkpoint)");
  cal->add_option("--bins", cal_bins, "confidence bins");

  CommonFlags toy_flags;
  std::string toy_target = "gaussian-1d";
  Index toy_m = 50, toy_iters = 2000;
  double toy_step = -1.0, toy_alpha = -1.0, toy_init_mean = 0.0, toy_init_spread = 1.0;
  auto* toy = app.add_subcommand("sample-toy", "run a particle rule on an analytic 1-D target");
  add_common(toy, toy_flags, false);
  toy->add_option("--target", toy_target, "gaussian-1d or mixture-1d");
  toy->add_option("--particles", toy_m, "particle count");
  toy->add_option("--iters", toy_iters, "iterations");
  toy->add_option("--stepsize", toy_step, "stepsize epsilon");
  toy->add_option("--alpha", toy_alpha, "repulsive weight");
  toy->add_option("--init-mean", toy_init_mean, "initialisation mean");
  toy->add_option("--init-spread", toy_init_spread, "initialisation spread (0 = common start)");

  std::vector<std::string> report_inputs;
  std::string report_out;
  auto* report = app.add_subcommand("report", "combine summary.json files into one table");
  report->add_option("--out", report_out, "output directory")->required();
  report->add_option("inputs", report_inputs, "report directories or summary.json paths")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_data(gen_flags);
    if (train_cmd->parsed()) return cmd_train(train_flags, train_seeds);
    if (sweep->parsed()) return cmd_sweep_heads(sweep_flags, sweep_counts);
    if (mask->parsed()) return cmd_mask_analysis(mask_flags, mask_checkpoint, mask_data);
    if (cal->parsed()) return cmd_calibrate(cal_flags, cal_checkpoint, cal_data, cal_bins);
    if (toy->parsed()) {
      return cmd_sample_toy(toy_flags, toy_target, toy_m, toy_iters, toy_step,
                            toy_alpha, toy_init_mean, toy_init_spread);
    }
    if (report->parsed()) return cmd_report(report_inputs, report_out);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
