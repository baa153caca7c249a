#include <stdexcept>

#include "rattn/kernel.hpp"
#include "rattn/trainer.hpp"

namespace rattn {

RegOutput frobenius_regularizer(const Matrix& a) {
  const Matrix gram = a * a.transpose();
  const Matrix resid = gram - Matrix::Identity(a.rows(), a.rows());
  RegOutput out;
  out.penalty = resid.squaredNorm();
  out.grad = 4.0 * resid * a;
  return out;
}

RegOutput disagreement_regularizer(const Matrix& z) {
  const Index m = z.rows();
  if (m < 2) {
    throw std::invalid_argument("disagreement_regularizer: need at least two heads");
  }
  std::vector<double> norms(static_cast<size_t>(m));
  for (Index i = 0; i < m; ++i) {
    norms[static_cast<size_t>(i)] = z.row(i).norm();
    if (norms[static_cast<size_t>(i)] == 0.0) {
      throw std::invalid_argument("disagreement_regularizer: head " +
                                  std::to_string(i) + " output is the zero vector");
    }
  }
  const double pairs = static_cast<double>(m * (m - 1) / 2);
  RegOutput out;
  out.grad = Matrix::Zero(m, z.cols());
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      const double ni = norms[static_cast<size_t>(i)];
      const double nj = norms[static_cast<size_t>(j)];
      const double c = z.row(i).dot(z.row(j)) / (ni * nj);
      out.penalty += c;
      // d cos(z_i, z_j) / d z_i = z_j/(|z_i||z_j|) - cos * z_i/|z_i|^2
      out.grad.row(i) += (z.row(j) / (ni * nj) - c * z.row(i) / (ni * ni)) / pairs;
      out.grad.row(j) += (z.row(i) / (ni * nj) - c * z.row(j) / (nj * nj)) / pairs;
    }
  }
  out.penalty /= pairs;
  return out;
}

RegOutput cosine_param_regularizer(const Matrix& particles, CosineVariant variant) {
  const Index m = particles.rows();
  if (m < 2) {
    throw std::invalid_argument("cosine_param_regularizer: need at least two particles");
  }
  const double pairs = static_cast<double>(m * (m - 1) / 2);
  RegOutput out;
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      out.penalty += cosine_eval(particles.row(i), particles.row(j));
    }
  }
  out.penalty /= pairs;

  if (variant == CosineVariant::swap_ij_smooth) {
    // The smoothed variant is the cosine-kernel sampler update itself; no
    // separable drift exists, so the grad block stays empty.
    out.grad = Matrix::Zero(0, 0);
    return out;
  }

  out.grad = Matrix::Zero(m, particles.cols());
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) {
      if (j == i) continue;  // cos(theta_i, theta_i) is constant; gradient 0
      if (variant == CosineVariant::plain) {
        out.grad.row(i) += cosine_grad_first(particles.row(i), particles.row(j));
      } else {
        out.grad.row(i) += cosine_grad_first(particles.row(j), particles.row(i));
      }
    }
    out.grad.row(i) /= static_cast<double>(m);
  }
  return out;
}

}  // namespace rattn
