#pragma once

#include "rattn/types.hpp"

#include <vector>

namespace rattn {

enum class KernelKind { rbf_median, rbf_fixed, cosine };

struct KernelSpec {
  KernelKind kind = KernelKind::rbf_median;
  // Fixed bandwidth, rbf_fixed only; must be > 0.
  double bandwidth = 1.0;
  // Lower bound on the effective bandwidth, keeps coincident particles from
  // dividing by zero.
  double bandwidth_floor = 1e-8;
};

// Median heuristic h = med^2 / ln(M) over the strictly-upper-triangular
// entries of the distance matrix (even count: mean of the two middle values),
// floored at `floor_value`. Rejects m < 2.
double median_bandwidth(const Matrix& dists, Index m, double floor_value = 1e-8);

// exp(-||x - y||^2 / h); rejects mismatched dimensions.
double rbf_eval(const Vector& x, const Vector& y, double h);

// Gradient of rbf_eval with respect to the first argument:
// -(2/h) (x - y) kappa(x, y).
Vector rbf_grad_first(const Vector& x, const Vector& y, double h);

// x.y / (||x|| ||y||); rejects zero-norm inputs.
double cosine_eval(const Vector& x, const Vector& y);

// Gradient of cosine_eval with respect to the first argument:
// y / (||x|| ||y||) - (x.y) x / (||x||^3 ||y||).
Vector cosine_grad_first(const Vector& x, const Vector& y);

struct KernelTable {
  // k(j, i) = kappa(theta_j, theta_i).
  Matrix k;
  // grad_to[i] is M x dim; row j = gradient of kappa(theta_j, theta_i) with
  // respect to theta_j.
  std::vector<Matrix> grad_to;
  // Bandwidth used for the RBF kinds (median-recomputed when applicable);
  // zero for the cosine kernel.
  double bandwidth = 0.0;
};

// Evaluates the kernel and its first-argument gradients over all particle
// pairs (rows of `particles`). For rbf_median the bandwidth is recomputed
// from the current particles. Rejects fewer than 2 particles.
KernelTable kernel_table(const Matrix& particles, const KernelSpec& spec);

}  // namespace rattn
