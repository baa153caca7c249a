#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "rattn/config.hpp"
#include "rattn/metrics.hpp"
#include "rattn/trainer.hpp"

namespace rattn {

struct SeedOutcome {
  uint64_t seed = 0;
  double test_acc = 0.0;
  double dist = 0.0;
  double ece = 0.0;
  double oe = 0.0;
  double redundant_fraction = 0.0;
  double best_val_acc = 0.0;
  int best_epoch = 0;
};

struct AspectSummary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single seed
  std::vector<double> per_seed;
};

struct ExperimentSummary {
  std::string rule;
  std::string variant;  // table row label, e.g. MA / RMA-SVGD / MA+F
  std::vector<SeedOutcome> seeds;
  std::map<std::string, AspectSummary> aspects;
};

// Table row label for a training configuration.
std::string variant_label(const TrainConfig& train);

// Trains config.seed_count seeds and writes the full report bundle under
// out_dir: config.txt, summary.json, metrics.csv, history.csv, per-head
// redundancy.csv, seed-0 calibration.csv / entropy_cdf.csv / checkpoint.json
// and attention dumps. Never touches paths outside out_dir; on failure an
// error.json lands there before the exception propagates.
ExperimentSummary run_experiment(const ExperimentConfig& config,
                                 const std::filesystem::path& out_dir);

struct SweepRow {
  std::string rule;
  Index heads = 0;
  double mean_val_error = 0.0;
  double std_val_error = 0.0;
  double mean_dist = 0.0;
};

// Runs the experiment per head count for both the plain and svgd rules,
// writing head_sweep.csv plus one report directory per run.
std::vector<SweepRow> head_sweep(const ExperimentConfig& config,
                                 const std::vector<Index>& head_counts,
                                 const std::filesystem::path& out_dir);

// Per-head masking table for an already-trained model; writes redundancy.csv.
std::vector<RedundancyRecord> mask_analysis_model(const SentenceClassifier& model,
                                                  const Dataset& data,
                                                  const std::filesystem::path& out_dir);

struct CalibrationOutcome {
  double ece = 0.0;
  double oe = 0.0;
  std::vector<CalibrationBin> table;
  EntropyCdf cdf;
};

// Calibration and entropy summaries for a trained model; writes
// calibration.csv and entropy_cdf.csv.
CalibrationOutcome calibrate_model(const SentenceClassifier& model, const Dataset& data,
                                   const std::filesystem::path& out_dir, int bins = 10);

// Renders the comparison table (one row per summary.json) as aligned text
// and writes table.csv next to it. Inputs may be report directories or
// summary.json paths.
std::string render_report(const std::vector<std::filesystem::path>& inputs,
                          const std::filesystem::path& out_dir);

}  // namespace rattn
