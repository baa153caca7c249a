#include "rattn/numeric.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

namespace rattn {

void check_finite(const Matrix& m, std::string_view where) {
  if (!m.allFinite()) {
    std::ostringstream msg;
    msg << "non-finite value in " << where << " (" << m.rows() << "x" << m.cols() << ")";
    throw std::runtime_error(msg.str());
  }
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    std::ostringstream msg;
    msg << "matmul: dimension mismatch, lhs is " << a.rows() << "x" << a.cols()
        << ", rhs is " << b.rows() << "x" << b.cols();
    throw std::invalid_argument(msg.str());
  }
  return a * b;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Index r = 0; r < logits.rows(); ++r) {
    const double row_max = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - row_max).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix pairwise_distances(const Matrix& points) {
  const Index m = points.rows();
  Matrix dists = Matrix::Zero(m, m);
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      const double d = (points.row(i) - points.row(j)).norm();
      dists(i, j) = d;
      dists(j, i) = d;
    }
  }
  return dists;
}

}  // namespace rattn
