#pragma once

#include <vector>

#include "rattn/classifier.hpp"
#include "rattn/data.hpp"
#include "rattn/types.hpp"

namespace rattn {

// Average pairwise 2-norm distance between head outputs: per example the
// mean over unordered head pairs, then the mean over examples. Each entry of
// `z_per_example` holds one example's M x d head-output matrix.
double head_distance(const std::vector<Matrix>& z_per_example);

// Same, evaluated by running the model over a dataset.
double model_head_distance(const SentenceClassifier& model, const Dataset& data);

struct CalibrationConfig {
  int bins = 10;  // equal-width bins on [0,1]
};

// One row per bin: the bin's half-open range (lo, hi] (the first bin also
// admits 0), how many predictions landed there, and their mean accuracy and
// confidence.
struct CalibrationBin {
  double lo = 0.0;
  double hi = 0.0;
  Index count = 0;
  double acc = 0.0;
  double conf = 0.0;
};
std::vector<CalibrationBin> calibration_table(const std::vector<double>& confidence,
                                              const std::vector<bool>& correct,
                                              const CalibrationConfig& config);

// Expected calibration error: sum over bins of |B|/n * |acc(B) - conf(B)|.
double ece(const std::vector<double>& confidence, const std::vector<bool>& correct,
           const CalibrationConfig& config);

// Overconfidence error: sum over bins of |B|/n * conf(B) * max(conf(B) - acc(B), 0).
double oe(const std::vector<double>& confidence, const std::vector<bool>& correct,
          const CalibrationConfig& config);

// Predictive entropies sorted ascending with their cumulative fractions.
struct EntropyCdf {
  std::vector<double> entropy;
  std::vector<double> cum_fraction;
};
EntropyCdf entropy_cdf(const Matrix& probs);

// Fraction of examples whose argmax probability hits the label. Argmax ties
// break toward the lower class index.
double accuracy(const SentenceClassifier& model, const Dataset& data);

// Winning softmax score and correctness per example, the inputs to ece/oe.
struct PredictionStats {
  std::vector<double> confidence;
  std::vector<bool> correct;
  Matrix probs;  // one row per example
};
PredictionStats predict(const SentenceClassifier& model, const Dataset& data);

struct RedundancyRecord {
  Index head = 0;
  double baseline = 0.0;
  double masked = 0.0;
  double delta = 0.0;  // baseline - masked; positive means the head mattered
};

// Masks each head in turn on top of the model's current mask state and
// reports the accuracy drop.
std::vector<RedundancyRecord> redundancy_report(const SentenceClassifier& model,
                                                const Dataset& data);

}  // namespace rattn
