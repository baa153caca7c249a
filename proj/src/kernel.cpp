#include "rattn/kernel.hpp"

#include "rattn/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace rattn {

namespace {

void check_same_dim(const Vector& x, const Vector& y, const char* who) {
  if (x.size() != y.size()) {
    std::ostringstream msg;
    msg << who << ": dimension mismatch, " << x.size() << " vs " << y.size();
    throw std::invalid_argument(msg.str());
  }
}

double checked_norm(const Vector& v, Index which, const char* who) {
  const double n = v.norm();
  if (n == 0.0) {
    std::ostringstream msg;
    msg << who << ": zero-norm particle at index " << which;
    throw std::invalid_argument(msg.str());
  }
  return n;
}

}  // namespace

double median_bandwidth(const Matrix& dists, Index m, double floor_value) {
  if (m < 2) {
    throw std::invalid_argument("median_bandwidth: need at least 2 particles");
  }
  if (dists.rows() != m || dists.cols() != m) {
    throw std::invalid_argument("median_bandwidth: distance matrix is not MxM");
  }
  std::vector<double> upper;
  upper.reserve(static_cast<std::size_t>(m) * (m - 1) / 2);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      upper.push_back(dists(i, j));
    }
  }
  std::sort(upper.begin(), upper.end());
  const std::size_t n = upper.size();
  const double med = (n % 2 == 1) ? upper[n / 2]
                                  : 0.5 * (upper[n / 2 - 1] + upper[n / 2]);
  const double h = med * med / std::log(static_cast<double>(m));
  return std::max(h, floor_value);
}

double rbf_eval(const Vector& x, const Vector& y, double h) {
  check_same_dim(x, y, "rbf_eval");
  if (h <= 0.0) {
    throw std::invalid_argument("rbf_eval: bandwidth must be > 0");
  }
  return std::exp(-(x - y).squaredNorm() / h);
}

Vector rbf_grad_first(const Vector& x, const Vector& y, double h) {
  check_same_dim(x, y, "rbf_grad_first");
  if (h <= 0.0) {
    throw std::invalid_argument("rbf_grad_first: bandwidth must be > 0");
  }
  return (-2.0 / h) * rbf_eval(x, y, h) * (x - y);
}

double cosine_eval(const Vector& x, const Vector& y) {
  check_same_dim(x, y, "cosine_eval");
  const double nx = checked_norm(x, 0, "cosine_eval");
  const double ny = checked_norm(y, 1, "cosine_eval");
  return x.dot(y) / (nx * ny);
}

Vector cosine_grad_first(const Vector& x, const Vector& y) {
  check_same_dim(x, y, "cosine_grad_first");
  const double nx = checked_norm(x, 0, "cosine_grad_first");
  const double ny = checked_norm(y, 1, "cosine_grad_first");
  const double dot = x.dot(y);
  return y / (nx * ny) - dot * x / (nx * nx * nx * ny);
}

KernelTable kernel_table(const Matrix& particles, const KernelSpec& spec) {
  const Index m = particles.rows();
  const Index dim = particles.cols();
  if (m < 2) {
    throw std::invalid_argument("kernel_table: need at least 2 particles");
  }
  if (spec.kind == KernelKind::rbf_fixed && spec.bandwidth <= 0.0) {
    throw std::invalid_argument("kernel_table: rbf_fixed requires bandwidth > 0");
  }

  KernelTable table;
  table.k.resize(m, m);
  table.grad_to.assign(static_cast<std::size_t>(m), Matrix::Zero(m, dim));

  if (spec.kind == KernelKind::cosine) {
    for (Index i = 0; i < m; ++i) {
      checked_norm(particles.row(i).transpose(), i, "kernel_table");
    }
    for (Index i = 0; i < m; ++i) {
      const Vector ti = particles.row(i).transpose();
      for (Index j = 0; j < m; ++j) {
        const Vector tj = particles.row(j).transpose();
        table.k(j, i) = cosine_eval(tj, ti);
        table.grad_to[static_cast<std::size_t>(i)].row(j) =
            cosine_grad_first(tj, ti).transpose();
      }
    }
    return table;
  }

  double h = spec.bandwidth;
  if (spec.kind == KernelKind::rbf_median) {
    h = median_bandwidth(pairwise_distances(particles), m, spec.bandwidth_floor);
  }
  h = std::max(h, spec.bandwidth_floor);
  table.bandwidth = h;

  for (Index i = 0; i < m; ++i) {
    const Vector ti = particles.row(i).transpose();
    for (Index j = 0; j < m; ++j) {
      const Vector tj = particles.row(j).transpose();
      const double k = rbf_eval(tj, ti, h);
      table.k(j, i) = k;
      table.grad_to[static_cast<std::size_t>(i)].row(j) =
          ((-2.0 / h) * k * (tj - ti)).transpose();
    }
  }
  return table;
}

}  // namespace rattn
