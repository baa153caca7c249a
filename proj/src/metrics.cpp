#include "rattn/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rattn {

double head_distance(const std::vector<Matrix>& z_per_example) {
  if (z_per_example.empty()) {
    throw std::invalid_argument("head_distance: no examples");
  }
  const Index m = z_per_example.front().rows();
  if (m < 2) {
    throw std::invalid_argument("head_distance: need at least two heads");
  }
  const double pairs = static_cast<double>(m * (m - 1) / 2);
  double total = 0.0;
  for (const Matrix& z : z_per_example) {
    if (z.rows() != m) {
      throw std::invalid_argument("head_distance: inconsistent head counts");
    }
    double example_sum = 0.0;
    for (Index i = 0; i < m; ++i) {
      for (Index j = i + 1; j < m; ++j) {
        example_sum += (z.row(i) - z.row(j)).norm();
      }
    }
    total += example_sum / pairs;
  }
  return total / static_cast<double>(z_per_example.size());
}

double model_head_distance(const SentenceClassifier& model, const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("model_head_distance: empty dataset");
  }
  std::vector<Matrix> zs;
  zs.reserve(data.examples.size());
  for (const Example& ex : data.examples) {
    zs.push_back(classifier_forward_trace(model, ex.tokens).z);
  }
  return head_distance(zs);
}

namespace {

// Bin m covers (lo, hi]; confidence 0 falls into the first bin.
int bin_of(double confidence, int bins) {
  if (confidence <= 0.0) return 0;
  const int b = static_cast<int>(std::ceil(confidence * bins)) - 1;
  return b >= bins ? bins - 1 : b;
}

}  // namespace

std::vector<CalibrationBin> calibration_table(const std::vector<double>& confidence,
                                              const std::vector<bool>& correct,
                                              const CalibrationConfig& config) {
  if (confidence.size() != correct.size()) {
    throw std::invalid_argument("calibration_table: confidence/correct length mismatch");
  }
  if (config.bins < 1) {
    throw std::invalid_argument("calibration_table: need at least one bin");
  }
  std::vector<CalibrationBin> table(static_cast<size_t>(config.bins));
  for (int b = 0; b < config.bins; ++b) {
    table[static_cast<size_t>(b)].lo = static_cast<double>(b) / config.bins;
    table[static_cast<size_t>(b)].hi = static_cast<double>(b + 1) / config.bins;
  }
  for (size_t i = 0; i < confidence.size(); ++i) {
    const double c = confidence[i];
    if (c < 0.0 || c > 1.0) {
      throw std::invalid_argument("calibration_table: confidence " +
                                  std::to_string(c) + " outside [0,1]");
    }
    CalibrationBin& bin = table[static_cast<size_t>(bin_of(c, config.bins))];
    bin.count += 1;
    bin.acc += correct[i] ? 1.0 : 0.0;
    bin.conf += c;
  }
  for (CalibrationBin& bin : table) {
    if (bin.count > 0) {
      bin.acc /= static_cast<double>(bin.count);
      bin.conf /= static_cast<double>(bin.count);
    }
  }
  return table;
}

double ece(const std::vector<double>& confidence, const std::vector<bool>& correct,
           const CalibrationConfig& config) {
  const auto table = calibration_table(confidence, correct, config);
  const double n = static_cast<double>(confidence.size());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const CalibrationBin& bin : table) {
    if (bin.count == 0) continue;
    total += (static_cast<double>(bin.count) / n) * std::abs(bin.acc - bin.conf);
  }
  return total;
}

double oe(const std::vector<double>& confidence, const std::vector<bool>& correct,
          const CalibrationConfig& config) {
  const auto table = calibration_table(confidence, correct, config);
  const double n = static_cast<double>(confidence.size());
  if (n == 0) return 0.0;
  double total = 0.0;
  for (const CalibrationBin& bin : table) {
    if (bin.count == 0) continue;
    const double gap = bin.conf - bin.acc;
    if (gap > 0.0) {
      total += (static_cast<double>(bin.count) / n) * bin.conf * gap;
    }
  }
  return total;
}

EntropyCdf entropy_cdf(const Matrix& probs) {
  if (probs.rows() < 1) {
    throw std::invalid_argument("entropy_cdf: no rows");
  }
  EntropyCdf out;
  out.entropy.reserve(static_cast<size_t>(probs.rows()));
  for (Index i = 0; i < probs.rows(); ++i) {
    const double sum = probs.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-6 || probs.row(i).minCoeff() < 0.0) {
      throw std::invalid_argument("entropy_cdf: row " + std::to_string(i) +
                                  " is not a probability vector");
    }
    double h = 0.0;
    for (Index c = 0; c < probs.cols(); ++c) {
      const double p = probs(i, c);
      if (p > 0.0) h -= p * std::log(p);
    }
    out.entropy.push_back(h);
  }
  std::sort(out.entropy.begin(), out.entropy.end());
  const double n = static_cast<double>(out.entropy.size());
  out.cum_fraction.reserve(out.entropy.size());
  for (size_t i = 0; i < out.entropy.size(); ++i) {
    out.cum_fraction.push_back(static_cast<double>(i + 1) / n);
  }
  return out;
}

PredictionStats predict(const SentenceClassifier& model, const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("predict: empty dataset");
  }
  PredictionStats stats;
  stats.probs.resize(data.size(), model.classes());
  stats.confidence.reserve(data.examples.size());
  stats.correct.reserve(data.examples.size());
  for (Index i = 0; i < data.size(); ++i) {
    const Example& ex = data.examples[static_cast<size_t>(i)];
    if (ex.label < 0 || ex.label >= model.classes()) {
      throw std::invalid_argument("predict: label " + std::to_string(ex.label) +
                                  " outside class range");
    }
    RowVector p = classifier_forward(model, ex.tokens);
    stats.probs.row(i) = p;
    Index best = 0;
    p.maxCoeff(&best);
    stats.confidence.push_back(p(best));
    stats.correct.push_back(best == ex.label);
  }
  return stats;
}

double accuracy(const SentenceClassifier& model, const Dataset& data) {
  const PredictionStats stats = predict(model, data);
  double hits = 0.0;
  for (bool c : stats.correct) hits += c ? 1.0 : 0.0;
  return hits / static_cast<double>(stats.correct.size());
}

std::vector<RedundancyRecord> redundancy_report(const SentenceClassifier& model,
                                                const Dataset& data) {
  const double baseline = accuracy(model, data);
  std::vector<RedundancyRecord> records;
  records.reserve(static_cast<size_t>(model.m()));
  for (Index head = 0; head < model.m(); ++head) {
    RedundancyRecord rec;
    rec.head = head;
    rec.baseline = baseline;
    rec.masked = accuracy(mask_head(model, head), data);
    rec.delta = baseline - rec.masked;
    records.push_back(rec);
  }
  return records;
}

}  // namespace rattn
