#pragma once

#include "rattn/kernel.hpp"
#include "rattn/rng.hpp"
#include "rattn/types.hpp"

namespace rattn {

// The M per-head parameter vectors, one flattened particle per row.
struct ParticleSet {
  Matrix values;

  ParticleSet() = default;
  explicit ParticleSet(Matrix v);

  Index m() const { return values.rows(); }
  Index dim() const { return values.cols(); }
};

enum class UpdateRule { plain, svgd, spos, sgld };

enum class PriorKind { uniform, gaussian };

struct PriorSpec {
  PriorKind kind = PriorKind::uniform;
  // Gaussian prior scale; must be > 0 for the gaussian kind.
  double sigma = 1.0;
};

struct SamplerConfig {
  UpdateRule rule = UpdateRule::svgd;
  // Stepsize epsilon for plain particle updates and the SPOS noise scale.
  double stepsize = 0.1;
  // Multiplicative per-epoch stepsize decay; 1 keeps epsilon constant.
  double stepsize_decay = 1.0;
  // Repulsive weight alpha on the kernel-gradient term.
  double repulsive_weight = 1.0;
  // SPOS inverse temperature 1/beta; 0 means beta -> infinity, which makes
  // SPOS coincide exactly with SVGD (the noise stream still advances).
  double beta_inv = 1e-3;
  KernelSpec kernel;
  PriorSpec prior;
  // Optional rescale of the mean-batch likelihood gradient (e.g. N/|B| for a
  // posterior-exact potential). Default 1: the gradient of the mean loss.
  double likelihood_scale = 1.0;
  // Eq. 5's noise scale is calibrated to the plain theta += eps*phi
  // integrator; pairing SPOS with an adaptive optimizer is rejected unless
  // this flag is set.
  bool allow_adaptive_spos = false;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamConfig cfg;
  Matrix m;
  Matrix v;
  long step = 0;

  static AdamState make(Index rows, Index cols, AdamConfig cfg = {});
};

// gradU row i = grad_nll row i + gradient of -log p0 at theta_i.
// The uniform prior contributes zero; the gaussian prior contributes
// theta_i / sigma^2.
Matrix grad_potential(const Matrix& grad_nll, const ParticleSet& particles,
                      const PriorSpec& prior);

// SVGD transport direction, one row per particle:
//   phi(theta_i) = (1/M) sum_j [ -kappa(theta_j, theta_i) gradU_j
//                                + alpha * grad_{theta_j} kappa(theta_j, theta_i) ].
// phi is an ascent direction: theta += eps * phi climbs the posterior.
// With a single particle the kernel path is skipped and phi = -gradU.
Matrix svgd_phi(const ParticleSet& particles, const Matrix& grad_u,
                const SamplerConfig& config);

// SPOS direction: the SVGD terms plus -beta_inv * gradU_i and Gaussian noise
// sqrt(2 * beta_inv / eps) * xi_i. Advances `rng` by exactly M x dim draws
// regardless of beta_inv.
Matrix spos_phi(const ParticleSet& particles, const Matrix& grad_u,
                const SamplerConfig& config, RngState& rng);

// One SGLD update for an independent particle: theta - eps*gradU + sqrt(2 eps) xi.
Vector sgld_step(const Vector& particle, const Vector& grad_u, double eps,
                 RngState& rng);
// Same update with the noise vector supplied (test hook; xi = 0 reduces to
// plain gradient descent).
Vector sgld_step_with_noise(const Vector& particle, const Vector& grad_u,
                            double eps, const Vector& xi);

// Standard Adam with bias correction; mutates params and state in place.
void adam_step(AdamState& state, Matrix& params, const Matrix& grads);

// Applies phi to the particles. Plain mode (optimizer == nullptr):
// theta += stepsize * phi. Adam mode: the optimizer receives the
// pseudo-gradient -phi and owns the stepsize; config.stepsize is not applied
// again. SPOS with an optimizer is rejected unless allow_adaptive_spos.
void apply_update(ParticleSet& particles, const Matrix& phi,
                  const SamplerConfig& config, AdamState* optimizer);

}  // namespace rattn
