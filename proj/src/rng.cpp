#include "rattn/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rattn {

namespace {

constexpr std::uint64_t kGamma = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer.
std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace

RngState RngState::make(std::uint64_t seed, Stream stream) {
  RngState s;
  s.key = mix(mix(seed + kGamma) ^ mix(static_cast<std::uint64_t>(stream) * kGamma));
  s.counter = 0;
  return s;
}

std::uint64_t RngState::next_u64() {
  ++counter;
  return mix(key + counter * kGamma);
}

double RngState::next_uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngState::next_gaussian() {
  // Box-Muller, cosine branch only: two uniforms per draw, no cached state.
  const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = next_uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngState::next_below(std::uint64_t bound) {
  if (bound == 0) {
    throw std::invalid_argument("RngState::next_below: bound must be >= 1");
  }
  const auto wide = static_cast<unsigned __int128>(next_u64()) * bound;
  return static_cast<std::uint64_t>(wide >> 64);
}

Vector gaussian(RngState& rng, Index n) {
  if (n < 1) {
    throw std::invalid_argument("gaussian: n must be >= 1");
  }
  Vector out(n);
  for (Index i = 0; i < n; ++i) {
    out[i] = rng.next_gaussian();
  }
  return out;
}

}  // namespace rattn
