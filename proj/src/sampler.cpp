#include "rattn/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "rattn/numeric.hpp"

namespace rattn {

ParticleSet::ParticleSet(Matrix v) : values(std::move(v)) {
  if (values.rows() < 1 || values.cols() < 1) {
    throw std::invalid_argument("ParticleSet: need at least one particle of dim >= 1");
  }
  check_finite(values, "ParticleSet");
}

AdamState AdamState::make(Index rows, Index cols, AdamConfig cfg) {
  AdamState s;
  s.cfg = cfg;
  s.m = Matrix::Zero(rows, cols);
  s.v = Matrix::Zero(rows, cols);
  return s;
}

Matrix grad_potential(const Matrix& grad_nll, const ParticleSet& particles,
                      const PriorSpec& prior) {
  if (grad_nll.rows() != particles.m() || grad_nll.cols() != particles.dim()) {
    throw std::invalid_argument("grad_potential: grad_nll shape does not match particles");
  }
  check_finite(grad_nll, "grad_potential");
  Matrix g = grad_nll;
  if (prior.kind == PriorKind::gaussian) {
    if (!(prior.sigma > 0.0)) {
      throw std::invalid_argument("grad_potential: gaussian prior needs sigma > 0");
    }
    g += particles.values / (prior.sigma * prior.sigma);
  }
  return g;
}

Matrix svgd_phi(const ParticleSet& particles, const Matrix& grad_u,
                const SamplerConfig& config) {
  const Index m = particles.m();
  const Index dim = particles.dim();
  if (grad_u.rows() != m || grad_u.cols() != dim) {
    throw std::invalid_argument("svgd_phi: grad_u shape does not match particles");
  }
  check_finite(grad_u, "svgd_phi");

  if (m == 1) {
    // No pairwise structure to speak of: the transport collapses to a plain
    // gradient step on the potential.
    return -grad_u;
  }

  const KernelTable table = kernel_table(particles.values, config.kernel);
  Matrix phi = Matrix::Zero(m, dim);
  for (Index i = 0; i < m; ++i) {
    RowVector acc = RowVector::Zero(dim);
    for (Index j = 0; j < m; ++j) {
      acc -= table.k(j, i) * grad_u.row(j);
      acc += config.repulsive_weight * table.grad_to[static_cast<size_t>(i)].row(j);
    }
    phi.row(i) = acc / static_cast<double>(m);
  }
  return phi;
}

Matrix spos_phi(const ParticleSet& particles, const Matrix& grad_u,
                const SamplerConfig& config, RngState& rng) {
  if (!(config.stepsize > 0.0)) {
    throw std::invalid_argument("spos_phi: stepsize must be > 0");
  }
  if (config.beta_inv < 0.0) {
    throw std::invalid_argument("spos_phi: beta_inv must be >= 0");
  }
  const Index m = particles.m();
  const Index dim = particles.dim();

  Matrix phi = svgd_phi(particles, grad_u, config);

  // Draw the noise block unconditionally so the stream position does not
  // depend on beta_inv; beta_inv = 0 then reproduces SVGD bit for bit.
  Matrix xi(m, dim);
  for (Index i = 0; i < m; ++i) {
    for (Index d = 0; d < dim; ++d) {
      xi(i, d) = rng.next_gaussian();
    }
  }
  if (config.beta_inv > 0.0) {
    phi -= config.beta_inv * grad_u;
    phi += std::sqrt(2.0 * config.beta_inv / config.stepsize) * xi;
  }
  return phi;
}

Vector sgld_step_with_noise(const Vector& particle, const Vector& grad_u,
                            double eps, const Vector& xi) {
  if (grad_u.size() != particle.size() || xi.size() != particle.size()) {
    throw std::invalid_argument("sgld_step: size mismatch");
  }
  if (!(eps > 0.0)) {
    throw std::invalid_argument("sgld_step: eps must be > 0");
  }
  return particle - eps * grad_u + std::sqrt(2.0 * eps) * xi;
}

Vector sgld_step(const Vector& particle, const Vector& grad_u, double eps,
                 RngState& rng) {
  return sgld_step_with_noise(particle, grad_u, eps, gaussian(rng, particle.size()));
}

void adam_step(AdamState& state, Matrix& params, const Matrix& grads) {
  if (grads.rows() != params.rows() || grads.cols() != params.cols() ||
      state.m.rows() != params.rows() || state.m.cols() != params.cols()) {
    throw std::invalid_argument("adam_step: shape mismatch");
  }
  const AdamConfig& c = state.cfg;
  state.step += 1;
  state.m = c.beta1 * state.m + (1.0 - c.beta1) * grads;
  state.v = c.beta2 * state.v + (1.0 - c.beta2) * grads.cwiseProduct(grads);
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const Matrix m_hat = state.m / bc1;
  const Matrix v_hat = state.v / bc2;
  params -= c.lr * (m_hat.array() / (v_hat.array().sqrt() + c.eps)).matrix();
}

void apply_update(ParticleSet& particles, const Matrix& phi,
                  const SamplerConfig& config, AdamState* optimizer) {
  if (phi.rows() != particles.m() || phi.cols() != particles.dim()) {
    throw std::invalid_argument("apply_update: phi shape does not match particles");
  }
  check_finite(phi, "apply_update");
  if (optimizer == nullptr) {
    particles.values += config.stepsize * phi;
    return;
  }
  if (config.rule == UpdateRule::spos && !config.allow_adaptive_spos) {
    throw std::invalid_argument(
        "apply_update: SPOS noise is calibrated for plain updates; "
        "set allow_adaptive_spos to combine it with Adam");
  }
  // Adam is a descent method, so it consumes -phi; its lr carries the whole
  // stepsize and config.stepsize is intentionally not applied a second time.
  adam_step(*optimizer, particles.values, -phi);
}

}  // namespace rattn
