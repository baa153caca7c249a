#include "rattn/toy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rattn {

ToyTarget parse_toy_target(const std::string& name) {
  if (name == "gaussian-1d") return ToyTarget::gaussian_1d;
  if (name == "mixture-1d") return ToyTarget::mixture_1d;
  throw std::invalid_argument("unknown toy target '" + name +
                              "' (expected gaussian-1d or mixture-1d)");
}

std::string toy_target_name(ToyTarget target) {
  return target == ToyTarget::gaussian_1d ? "gaussian-1d" : "mixture-1d";
}

Matrix toy_grad_potential(ToyTarget target, const Matrix& particles) {
  if (particles.cols() != 1) {
    throw std::invalid_argument("toy_grad_potential: targets are one-dimensional");
  }
  Matrix grad(particles.rows(), 1);
  for (Index i = 0; i < particles.rows(); ++i) {
    const double x = particles(i, 0);
    if (target == ToyTarget::gaussian_1d) {
      grad(i, 0) = x;
      continue;
    }
    // Mixture 0.5 N(-3,1) + 0.5 N(3,1): gradU is the responsibility-weighted
    // pull toward each mode. Shift the exponents by their max so the
    // responsibilities stay finite far from the origin.
    const double e_left = -0.5 * (x + 3.0) * (x + 3.0);
    const double e_right = -0.5 * (x - 3.0) * (x - 3.0);
    const double top = std::max(e_left, e_right);
    const double w_left = std::exp(e_left - top);
    const double w_right = std::exp(e_right - top);
    const double r_left = w_left / (w_left + w_right);
    grad(i, 0) = r_left * (x + 3.0) + (1.0 - r_left) * (x - 3.0);
  }
  return grad;
}

ToyResult sample_toy(const ToyConfig& config) {
  if (config.m < 1) {
    throw std::invalid_argument("sample_toy: need at least one particle");
  }
  if (config.iterations < 0) {
    throw std::invalid_argument("sample_toy: negative iteration count");
  }
  if (config.init_spread < 0.0) {
    throw std::invalid_argument("sample_toy: init_spread must be >= 0");
  }

  RngState init_rng = RngState::make(config.seed, Stream::toy);
  ParticleSet particles;
  particles.values.resize(config.m, 1);
  for (Index i = 0; i < config.m; ++i) {
    particles.values(i, 0) =
        config.init_mean + config.init_spread * init_rng.next_gaussian();
  }

  const Stream noise_stream = config.sampler.rule == UpdateRule::sgld
                                  ? Stream::sgld_noise
                                  : Stream::spos_noise;
  RngState noise_rng = RngState::make(config.seed, noise_stream);

  SamplerConfig sampler = config.sampler;
  for (Index it = 0; it < config.iterations; ++it) {
    const Matrix grad_u = toy_grad_potential(config.target, particles.values);
    switch (sampler.rule) {
      case UpdateRule::sgld:
        for (Index i = 0; i < config.m; ++i) {
          particles.values.row(i) =
              sgld_step(Vector(particles.values.row(i).transpose()),
                        Vector(grad_u.row(i).transpose()), sampler.stepsize,
                        noise_rng)
                  .transpose();
        }
        break;
      case UpdateRule::plain:
        apply_update(particles, Matrix(-grad_u), sampler, nullptr);
        break;
      case UpdateRule::svgd:
        apply_update(particles, svgd_phi(particles, grad_u, sampler), sampler,
                     nullptr);
        break;
      case UpdateRule::spos:
        apply_update(particles, spos_phi(particles, grad_u, sampler, noise_rng),
                     sampler, nullptr);
        break;
    }
    sampler.stepsize *= sampler.stepsize_decay;
  }

  ToyResult result;
  result.particles = particles.values;
  result.mean = particles.values.col(0).mean();
  if (config.m > 1) {
    const double mu = result.mean;
    result.variance =
        (particles.values.col(0).array() - mu).square().sum() /
        static_cast<double>(config.m - 1);
  }
  for (Index i = 0; i < config.m; ++i) {
    if (particles.values(i, 0) < 0.0) {
      ++result.left_count;
    } else {
      ++result.right_count;
    }
  }
  return result;
}

}  // namespace rattn
