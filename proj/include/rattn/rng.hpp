#pragma once

#include "rattn/types.hpp"

#include <cstdint>
#include <vector>

namespace rattn {

// Named RNG streams, one per consumer. Draws in one stream never shift the
// draws of another, so adding a consumer leaves existing runs unchanged.
enum class Stream : std::uint64_t {
  init = 1,
  jitter = 2,
  data_gen = 3,
  shuffle = 4,
  spos_noise = 5,
  sgld_noise = 6,
  toy = 7,
  test = 99,
};

// Counter-based generator: the n-th output is a pure function of
// (seed, stream, n). State is two words; advancing is explicit.
struct RngState {
  std::uint64_t key = 0;
  std::uint64_t counter = 0;

  static RngState make(std::uint64_t seed, Stream stream);

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double next_uniform();
  // Standard normal; consumes exactly two uniforms.
  double next_gaussian();
  // Uniform integer on [0, bound); bound >= 1.
  std::uint64_t next_below(std::uint64_t bound);
};

// n i.i.d. standard-normal draws; rejects n < 1.
Vector gaussian(RngState& rng, Index n);

// Deterministic Fisher-Yates shuffle.
template <typename T>
void shuffle(RngState& rng, std::vector<T>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace rattn
