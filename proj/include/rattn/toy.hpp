#pragma once

#include <cstdint>
#include <string>

#include "rattn/sampler.hpp"
#include "rattn/types.hpp"

namespace rattn {

// One-dimensional analytic targets for validating the particle rules
// against closed-form moments.
enum class ToyTarget {
  gaussian_1d,  // standard normal, U = x^2/2
  mixture_1d,   // 0.5 N(-3,1) + 0.5 N(3,1)
};

ToyTarget parse_toy_target(const std::string& name);
std::string toy_target_name(ToyTarget target);

// Gradient of the potential U = -log p for the target, one row per particle.
Matrix toy_grad_potential(ToyTarget target, const Matrix& particles);

struct ToyConfig {
  ToyTarget target = ToyTarget::gaussian_1d;
  SamplerConfig sampler;
  Index m = 50;
  Index iterations = 2000;
  uint64_t seed = 0;
  double init_mean = 0.0;
  // Standard deviation of the particle initialisation; zero starts every
  // particle exactly at init_mean (the collapse-control setting).
  double init_spread = 1.0;
};

struct ToyResult {
  Matrix particles;  // m x 1 final positions
  double mean = 0.0;
  double variance = 0.0;  // sample variance (n - 1 denominator)
  Index left_count = 0;   // particles with x < 0
  Index right_count = 0;  // particles with x >= 0
};

// Runs the configured update rule on the analytic target and summarises the
// final particle cloud.
ToyResult sample_toy(const ToyConfig& config);

}  // namespace rattn
