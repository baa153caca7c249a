#include "rattn/synthetic.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>
#include <string>

#include "rattn/rng.hpp"

namespace rattn {

namespace {

void check_config(const SyntheticTaskConfig& c) {
  if (c.aspects < 2) {
    throw std::invalid_argument("gen_synthetic: need at least two aspects");
  }
  if (c.aspects >= 63) {
    throw std::invalid_argument("gen_synthetic: aspect bitmask limited to 62 bits");
  }
  if (c.tokens_per_aspect < 1) {
    throw std::invalid_argument("gen_synthetic: tokens_per_aspect must be >= 1");
  }
  const Index signal_vocab = c.aspects * c.tokens_per_aspect;
  if (c.vocab <= signal_vocab) {
    throw std::invalid_argument(
        "gen_synthetic: vocab " + std::to_string(c.vocab) +
        " leaves no noise tokens beyond " + std::to_string(signal_vocab) +
        " signal ids");
  }
  const uint64_t patterns = uint64_t{1} << c.aspects;
  if (c.classes < 2 || static_cast<uint64_t>(c.classes) > patterns) {
    throw std::invalid_argument(
        "gen_synthetic: class count " + std::to_string(c.classes) +
        " infeasible for " + std::to_string(patterns) + " aspect patterns");
  }
  if (c.min_len < c.aspects || c.max_len < c.min_len) {
    throw std::invalid_argument("gen_synthetic: length range must cover the aspect count");
  }
  if (c.noise_fraction < 0.0 || c.noise_fraction >= 1.0) {
    throw std::invalid_argument("gen_synthetic: noise_fraction must lie in [0, 1)");
  }
  if (c.train_examples < 1 || c.val_examples < 1 || c.test_examples < 1) {
    throw std::invalid_argument("gen_synthetic: every split needs at least one example");
  }
}

Example draw_example(RngState& rng, const SyntheticTaskConfig& c) {
  const uint64_t pattern = rng.next_below(uint64_t{1} << c.aspects);
  const Index len =
      c.min_len + static_cast<Index>(rng.next_below(
                      static_cast<uint64_t>(c.max_len - c.min_len + 1)));

  std::vector<Index> present;
  for (Index a = 0; a < c.aspects; ++a) {
    if (pattern & (uint64_t{1} << a)) present.push_back(a);
  }

  Index signal = 0;
  if (!present.empty()) {
    signal = static_cast<Index>((1.0 - c.noise_fraction) * static_cast<double>(len) + 0.5);
    signal = std::max(signal, static_cast<Index>(present.size()));
    signal = std::min(signal, len);
  }

  Example ex;
  ex.label = pattern_label(pattern, c.classes);
  ex.tokens.reserve(static_cast<size_t>(len));
  auto push_aspect_token = [&](Index aspect) {
    const Index base = aspect * c.tokens_per_aspect;
    ex.tokens.push_back(static_cast<int>(
        base + static_cast<Index>(rng.next_below(static_cast<uint64_t>(c.tokens_per_aspect)))));
  };
  // One guaranteed token per present aspect, so the pattern is always
  // recoverable from the sequence.
  for (Index a : present) push_aspect_token(a);
  for (Index s = static_cast<Index>(present.size()); s < signal; ++s) {
    push_aspect_token(present[rng.next_below(present.size())]);
  }
  const Index noise_base = c.aspects * c.tokens_per_aspect;
  for (Index s = signal; s < len; ++s) {
    ex.tokens.push_back(static_cast<int>(
        noise_base + static_cast<Index>(rng.next_below(
                         static_cast<uint64_t>(c.vocab - noise_base)))));
  }
  shuffle(rng, ex.tokens);
  return ex;
}

}  // namespace

int pattern_label(uint64_t pattern, Index classes) {
  if (classes < 1) {
    throw std::invalid_argument("pattern_label: classes must be >= 1");
  }
  // Fold the presence bitmask onto the class range. With classes = 2^c this
  // keeps the low c aspect bits, so recovering the label needs evidence from
  // several aspect groups at once.
  return static_cast<int>(pattern % static_cast<uint64_t>(classes));
}

uint64_t aspect_pattern(const std::vector<int>& tokens,
                        const SyntheticTaskConfig& config) {
  uint64_t pattern = 0;
  for (int tok : tokens) {
    const Index id = static_cast<Index>(tok);
    if (id < 0 || id >= config.vocab) {
      throw std::invalid_argument("aspect_pattern: token " + std::to_string(tok) +
                                  " outside vocab");
    }
    if (id < config.aspects * config.tokens_per_aspect) {
      pattern |= uint64_t{1} << (id / config.tokens_per_aspect);
    }
  }
  return pattern;
}

DataSplits gen_synthetic(const SyntheticTaskConfig& config) {
  check_config(config);
  RngState rng = RngState::make(config.seed, Stream::data_gen);

  DataSplits splits;
  for (Dataset* d : {&splits.train, &splits.val, &splits.test}) {
    d->vocab = config.vocab;
    d->classes = config.classes;
  }

  // Sequences already claimed by earlier splits; a later split may not reuse
  // them, which keeps the splits disjoint.
  std::set<std::vector<int>> claimed;
  auto fill = [&](Dataset& dest, Index count) {
    std::set<std::vector<int>> mine;
    for (Index i = 0; i < count; ++i) {
      Example ex;
      bool fresh = false;
      for (int attempt = 0; attempt < 1000 && !fresh; ++attempt) {
        ex = draw_example(rng, config);
        fresh = claimed.find(ex.tokens) == claimed.end();
      }
      if (!fresh) {
        throw std::runtime_error(
            "gen_synthetic: could not draw a sequence unseen by other splits; "
            "task space too small for the requested counts");
      }
      mine.insert(ex.tokens);
      dest.examples.push_back(std::move(ex));
    }
    claimed.insert(mine.begin(), mine.end());
  };
  fill(splits.train, config.train_examples);
  fill(splits.val, config.val_examples);
  fill(splits.test, config.test_examples);
  return splits;
}

}  // namespace rattn
