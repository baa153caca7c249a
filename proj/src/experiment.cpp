#include "rattn/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "rattn/io.hpp"
#include "rattn/synthetic.hpp"

namespace fs = std::filesystem;

namespace rattn {

namespace {

using nlohmann::json;

double mean_of(const std::vector<double>& xs) {
  double sum = 0.0;
  for (double x : xs) sum += x;
  return xs.empty() ? 0.0 : sum / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  const double mu = mean_of(xs);
  double sq = 0.0;
  for (double x : xs) sq += (x - mu) * (x - mu);
  return std::sqrt(sq / static_cast<double>(xs.size() - 1));
}

AspectSummary summarize(std::vector<double> per_seed) {
  AspectSummary s;
  s.mean = mean_of(per_seed);
  s.stddev = stddev_of(per_seed);
  s.per_seed = std::move(per_seed);
  return s;
}

json aspect_to_json(const AspectSummary& s) {
  return json{{"mean", s.mean}, {"std", s.stddev}, {"per_seed", s.per_seed}};
}

DataSplits load_splits(const ExperimentConfig& config) {
  if (config.data_path.empty()) {
    return gen_synthetic(config.task);
  }
  return read_splits(config.data_path);
}

void write_summary_json(const fs::path& path, const ExperimentSummary& summary,
                        const ExperimentConfig& config) {
  json j;
  j["rule"] = summary.rule;
  j["variant"] = summary.variant;
  j["seed_count"] = config.seed_count;
  j["base_seed"] = config.base_seed;
  json aspects = json::object();
  for (const auto& [name, aspect] : summary.aspects) {
    aspects[name] = aspect_to_json(aspect);
  }
  j["aspects"] = aspects;
  write_text_atomic(path, j.dump(2) + "\n");
}

void write_error_record(const fs::path& out_dir, const std::string& what) {
  try {
    json j;
    j["error"] = what;
    write_text_atomic(out_dir / "error.json", j.dump(2) + "\n");
  } catch (...) {
    // The original failure is the one worth reporting.
  }
}

void dump_attention(const fs::path& dir, const SentenceClassifier& model,
                    const Dataset& data, Index count) {
  for (Index i = 0; i < std::min<Index>(count, data.size()); ++i) {
    const ForwardTrace trace =
        classifier_forward_trace(model, data.examples[static_cast<size_t>(i)].tokens);
    write_attention_csv(dir / ("example_" + std::to_string(i) + ".csv"), trace.a);
  }
}

ExperimentSummary run_experiment_inner(const ExperimentConfig& config,
                                       const fs::path& out_dir) {
  const DataSplits splits = load_splits(config);

  ExperimentSummary summary;
  summary.rule = rule_name(config.train.sampler.rule);
  summary.variant = variant_label(config.train);

  CsvTable metrics_csv;
  metrics_csv.header = {"seed",          "test_acc",         "dist", "ece", "oe",
                        "redundant_fraction", "best_val_acc", "best_epoch"};
  CsvTable history_csv;
  history_csv.header = {"seed", "epoch", "train_loss", "val_acc", "dist", "seconds"};
  CsvTable redundancy_csv;
  redundancy_csv.header = {"seed", "head", "baseline", "masked", "delta"};

  for (int s = 0; s < config.seed_count; ++s) {
    TrainConfig tc = config.train;
    tc.seed = config.base_seed + static_cast<uint64_t>(s);
    const TrainResult result = train(tc, splits);

    SeedOutcome outcome;
    outcome.seed = tc.seed;
    outcome.best_val_acc = result.history.best_val_acc;
    outcome.best_epoch = result.history.best_epoch;

    // Accuracy, Dist and calibration describe the model the particle
    // dynamics produce, so they read the final-epoch model. The masking
    // analysis asks which heads could be pruned from the model a user
    // would deploy, so it reads the best-validation checkpoint — the one
    // checkpoint.json stores.
    const PredictionStats stats = predict(result.final, splits.test);
    Index hits = 0;
    for (bool ok : stats.correct) hits += ok ? 1 : 0;
    outcome.test_acc = static_cast<double>(hits) / static_cast<double>(stats.correct.size());
    outcome.dist = result.final.m() >= 2
                       ? model_head_distance(result.final, splits.test)
                       : 0.0;

    if (config.metrics.calibration) {
      const CalibrationConfig cal;
      outcome.ece = ece(stats.confidence, stats.correct, cal);
      outcome.oe = oe(stats.confidence, stats.correct, cal);
    }
    if (config.metrics.redundancy) {
      const auto records = redundancy_report(result.model, splits.test);
      Index redundant = 0;
      for (const RedundancyRecord& rec : records) {
        if (std::abs(rec.delta) < config.redundancy_threshold) ++redundant;
        redundancy_csv.rows.push_back({std::to_string(outcome.seed),
                                       std::to_string(rec.head),
                                       format_double(rec.baseline),
                                       format_double(rec.masked),
                                       format_double(rec.delta)});
      }
      outcome.redundant_fraction =
          static_cast<double>(redundant) / static_cast<double>(records.size());
    }

    for (const EpochRecord& rec : result.history.epochs) {
      history_csv.rows.push_back({std::to_string(outcome.seed), std::to_string(rec.epoch),
                                  format_double(rec.train_loss), format_double(rec.val_acc),
                                  format_double(rec.dist), format_double(rec.seconds)});
    }
    metrics_csv.rows.push_back(
        {std::to_string(outcome.seed), format_double(outcome.test_acc),
         format_double(outcome.dist), format_double(outcome.ece), format_double(outcome.oe),
         format_double(outcome.redundant_fraction), format_double(outcome.best_val_acc),
         std::to_string(outcome.best_epoch)});

    if (s == 0) {
      save_checkpoint(out_dir / "checkpoint.json", result.model);
      if (config.metrics.calibration) {
        const CalibrationConfig cal;
        const auto table = calibration_table(stats.confidence, stats.correct, cal);
        CsvTable cal_csv;
        cal_csv.header = {"bin_lo", "bin_hi", "count", "acc", "conf"};
        for (const CalibrationBin& bin : table) {
          cal_csv.rows.push_back({format_double(bin.lo), format_double(bin.hi),
                                  std::to_string(bin.count), format_double(bin.acc),
                                  format_double(bin.conf)});
        }
        write_csv(out_dir / "calibration.csv", cal_csv);
      }
      if (config.metrics.entropy) {
        const EntropyCdf cdf = entropy_cdf(stats.probs);
        CsvTable cdf_csv;
        cdf_csv.header = {"entropy", "cum_fraction"};
        for (size_t i = 0; i < cdf.entropy.size(); ++i) {
          cdf_csv.rows.push_back(
              {format_double(cdf.entropy[i]), format_double(cdf.cum_fraction[i])});
        }
        write_csv(out_dir / "entropy_cdf.csv", cdf_csv);
      }
      dump_attention(out_dir / "attention", result.final, splits.test, 3);
    }
    summary.seeds.push_back(outcome);
  }

  std::vector<double> acc, dist, ece_v, oe_v, red, val;
  for (const SeedOutcome& o : summary.seeds) {
    acc.push_back(o.test_acc);
    dist.push_back(o.dist);
    ece_v.push_back(o.ece);
    oe_v.push_back(o.oe);
    red.push_back(o.redundant_fraction);
    val.push_back(o.best_val_acc);
  }
  summary.aspects["acc"] = summarize(acc);
  summary.aspects["dist"] = summarize(dist);
  summary.aspects["ece"] = summarize(ece_v);
  summary.aspects["oe"] = summarize(oe_v);
  summary.aspects["redundant_fraction"] = summarize(red);
  summary.aspects["best_val_acc"] = summarize(val);

  write_text_atomic(out_dir / "config.txt", render_config(config));
  write_csv(out_dir / "metrics.csv", metrics_csv);
  write_csv(out_dir / "history.csv", history_csv);
  if (config.metrics.redundancy) {
    write_csv(out_dir / "redundancy.csv", redundancy_csv);
  }
  write_summary_json(out_dir / "summary.json", summary, config);
  return summary;
}

}  // namespace

std::string variant_label(const TrainConfig& train) {
  std::string base;
  switch (train.sampler.rule) {
    case UpdateRule::plain: base = "MA"; break;
    case UpdateRule::svgd: base = "RMA-SVGD"; break;
    case UpdateRule::spos: base = "RMA-SPOS"; break;
    case UpdateRule::sgld: base = "SGLD"; break;
  }
  switch (train.reg.kind) {
    case RegKind::none: break;
    case RegKind::frobenius: base += "+F"; break;
    case RegKind::disagreement: base += "+D"; break;
    case RegKind::cosine_param:
      base += train.reg.variant == CosineVariant::plain ? "+C:plain"
              : train.reg.variant == CosineVariant::swap_ij ? "+C:swap"
                                                            : "+C:swap-smooth";
      break;
  }
  return base;
}

ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const fs::path& out_dir) {
  fs::create_directories(out_dir);
  try {
    return run_experiment_inner(config, out_dir);
  } catch (const std::exception& err) {
    write_error_record(out_dir, err.what());
    throw;
  }
}

std::vector<SweepRow> head_sweep(const ExperimentConfig& config,
                                 const std::vector<Index>& head_counts,
                                 const fs::path& out_dir) {
  if (head_counts.empty()) {
    throw std::invalid_argument("head_sweep: no head counts requested");
  }
  for (Index m : head_counts) {
    if (m < 1) throw std::invalid_argument("head_sweep: head counts must be >= 1");
  }
  fs::create_directories(out_dir);

  std::vector<SweepRow> rows;
  for (UpdateRule rule : {UpdateRule::plain, UpdateRule::svgd}) {
    for (Index m : head_counts) {
      ExperimentConfig sub = config;
      sub.train.sampler.rule = rule;
      sub.train.m = m;
      const fs::path run_dir =
          out_dir / ("sweep-" + rule_name(rule) + "-m" + std::to_string(m));
      const ExperimentSummary summary = run_experiment(sub, run_dir);

      SweepRow row;
      row.rule = rule_name(rule);
      row.heads = m;
      std::vector<double> errors;
      for (double v : summary.aspects.at("best_val_acc").per_seed) {
        errors.push_back(1.0 - v);
      }
      row.mean_val_error = mean_of(errors);
      row.std_val_error = stddev_of(errors);
      row.mean_dist = summary.aspects.at("dist").mean;
      rows.push_back(row);
    }
  }

  CsvTable csv;
  csv.header = {"rule", "heads", "mean_val_error", "std_val_error", "mean_dist"};
  for (const SweepRow& row : rows) {
    csv.rows.push_back({row.rule, std::to_string(row.heads),
                        format_double(row.mean_val_error),
                        format_double(row.std_val_error), format_double(row.mean_dist)});
  }
  write_csv(out_dir / "head_sweep.csv", csv);
  return rows;
}

std::vector<RedundancyRecord> mask_analysis_model(const SentenceClassifier& model,
                                                  const Dataset& data,
                                                  const fs::path& out_dir) {
  fs::create_directories(out_dir);
  const auto records = redundancy_report(model, data);
  CsvTable csv;
  csv.header = {"head", "baseline", "masked", "delta"};
  for (const RedundancyRecord& rec : records) {
    csv.rows.push_back({std::to_string(rec.head), format_double(rec.baseline),
                        format_double(rec.masked), format_double(rec.delta)});
  }
  write_csv(out_dir / "redundancy.csv", csv);
  return records;
}

CalibrationOutcome calibrate_model(const SentenceClassifier& model, const Dataset& data,
                                   const fs::path& out_dir, int bins) {
  fs::create_directories(out_dir);
  const PredictionStats stats = predict(model, data);
  CalibrationConfig cal;
  cal.bins = bins;

  CalibrationOutcome outcome;
  outcome.ece = ece(stats.confidence, stats.correct, cal);
  outcome.oe = oe(stats.confidence, stats.correct, cal);
  outcome.table = calibration_table(stats.confidence, stats.correct, cal);
  outcome.cdf = entropy_cdf(stats.probs);

  CsvTable cal_csv;
  cal_csv.header = {"bin_lo", "bin_hi", "count", "acc", "conf"};
  for (const CalibrationBin& bin : outcome.table) {
    cal_csv.rows.push_back({format_double(bin.lo), format_double(bin.hi),
                            std::to_string(bin.count), format_double(bin.acc),
                            format_double(bin.conf)});
  }
  write_csv(out_dir / "calibration.csv", cal_csv);

  CsvTable cdf_csv;
  cdf_csv.header = {"entropy", "cum_fraction"};
  for (size_t i = 0; i < outcome.cdf.entropy.size(); ++i) {
    cdf_csv.rows.push_back(
        {format_double(outcome.cdf.entropy[i]), format_double(outcome.cdf.cum_fraction[i])});
  }
  write_csv(out_dir / "entropy_cdf.csv", cdf_csv);
  return outcome;
}

std::string render_report(const std::vector<fs::path>& inputs, const fs::path& out_dir) {
  if (inputs.empty()) {
    throw std::invalid_argument("render_report: no summaries given");
  }
  struct Row {
    std::string variant, rule;
    double acc_mean, acc_std, dist_mean, ece_mean, oe_mean, red_mean;
  };
  std::vector<Row> rows;
  for (const fs::path& input : inputs) {
    const fs::path file = fs::is_directory(input) ? input / "summary.json" : input;
    json j;
    try {
      j = json::parse(read_text(file));
    } catch (const json::parse_error& err) {
      throw std::runtime_error("render_report: " + file.string() + ": " + err.what());
    }
    Row row;
    row.variant = j.at("variant").get<std::string>();
    row.rule = j.at("rule").get<std::string>();
    const json& aspects = j.at("aspects");
    row.acc_mean = aspects.at("acc").at("mean").get<double>();
    row.acc_std = aspects.at("acc").at("std").get<double>();
    row.dist_mean = aspects.at("dist").at("mean").get<double>();
    row.ece_mean = aspects.at("ece").at("mean").get<double>();
    row.oe_mean = aspects.at("oe").at("mean").get<double>();
    row.red_mean = aspects.at("redundant_fraction").at("mean").get<double>();
    rows.push_back(row);
  }

  std::ostringstream text;
  char line[160];
  std::snprintf(line, sizeof(line), "%-18s %-6s %-15s %-8s %-8s %-8s %-10s\n", "variant",
                "rule", "acc", "dist", "ece", "oe", "redundant");
  text << line;
  CsvTable csv;
  csv.header = {"variant", "rule", "acc_mean", "acc_std", "dist_mean",
                "ece_mean", "oe_mean", "redundant_fraction"};
  for (const Row& row : rows) {
    std::snprintf(line, sizeof(line),
                  "%-18s %-6s %6.4f+-%-6.4f %-8.4f %-8.4f %-8.4f %-10.4f\n",
                  row.variant.c_str(), row.rule.c_str(), row.acc_mean, row.acc_std,
                  row.dist_mean, row.ece_mean, row.oe_mean, row.red_mean);
    text << line;
    csv.rows.push_back({row.variant, row.rule, format_double(row.acc_mean),
                        format_double(row.acc_std), format_double(row.dist_mean),
                        format_double(row.ece_mean), format_double(row.oe_mean),
                        format_double(row.red_mean)});
  }
  fs::create_directories(out_dir);
  write_csv(out_dir / "table.csv", csv);
  write_text_atomic(out_dir / "table.txt", text.str());
  return text.str();
}

}  // namespace rattn
