#pragma once

#include <cstdint>

#include "rattn/data.hpp"
#include "rattn/types.hpp"

namespace rattn {

// Multi-aspect token classification task. The vocabulary is carved into
// `aspects` signal groups of `tokens_per_aspect` ids each, with everything
// above them acting as noise. Each example draws an aspect-presence pattern
// uniformly, scatters at least one token from every present aspect among
// noise tokens, and labels the example by its pattern. Reading any single
// aspect therefore caps accuracy strictly below an oracle that sees the
// whole pattern.
struct SyntheticTaskConfig {
  Index vocab = 200;
  Index aspects = 4;
  Index tokens_per_aspect = 5;
  double noise_fraction = 0.6;  // target share of noise tokens per sequence
  Index min_len = 12;
  Index max_len = 24;
  Index classes = 8;
  Index train_examples = 2000;
  Index val_examples = 500;
  Index test_examples = 500;
  uint64_t seed = 0;
};

// Label assigned to an aspect-presence bitmask: pattern mod classes.
int pattern_label(uint64_t pattern, Index classes);

// Bitmask of aspects with at least one token in the sequence.
uint64_t aspect_pattern(const std::vector<int>& tokens,
                        const SyntheticTaskConfig& config);

// Deterministically generates the three splits. Splits are disjoint: a token
// sequence claimed by one split never appears in another.
DataSplits gen_synthetic(const SyntheticTaskConfig& config);

}  // namespace rattn
