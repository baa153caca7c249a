#pragma once

#include <filesystem>
#include <string>

#include "rattn/synthetic.hpp"
#include "rattn/trainer.hpp"

namespace rattn {

struct MetricToggles {
  bool calibration = true;
  bool redundancy = true;
  bool entropy = true;
};

// Everything one experiment needs. `data_path` empty means "generate the
// synthetic task from `task`"; otherwise it names a split directory written
// by gen-data (train.tsv / val.tsv / test.tsv / vocab.tsv).
struct ExperimentConfig {
  SyntheticTaskConfig task;
  std::string data_path;
  TrainConfig train;
  int seed_count = 10;
  uint64_t base_seed = 0;
  MetricToggles metrics;
  // A head whose masking moves accuracy by less than this is counted
  // redundant (0.5 accuracy points).
  double redundancy_threshold = 0.005;
};

UpdateRule parse_rule(const std::string& name);
std::string rule_name(UpdateRule rule);

// Parses the key = value config text. Lines are `dotted.key = value`, blank,
// or `#` comments. Every key has a default; unknown keys are errors so typos
// in sweep scripts fail loudly. When reg.kind is set without reg.lambda, the
// kind's default strength applies (frobenius/disagreement 1.0, cosine 0.1).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// The full key set with current values, suitable for round-tripping and for
// recording the effective config beside results.
std::string render_config(const ExperimentConfig& config);

}  // namespace rattn
