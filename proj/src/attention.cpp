#include "rattn/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rattn/numeric.hpp"

namespace rattn {

namespace {

Index scope_width(const ParticleScope& scope, Index per_matrix) {
  Index w = 0;
  if (scope.q) w += per_matrix;
  if (scope.k) w += per_matrix;
  if (scope.v) w += per_matrix;
  return w;
}

void flatten_into(RowVector& row, Index& at, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) row(at++) = m(i, j);
}

void unflatten_from(const RowVector& row, Index& at, Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = row(at++);
}

}  // namespace

HeadOutput dot_product_head(const Matrix& q, const Matrix& k, const Matrix& v,
                            const DotProductHeadParams& params, Index d_k) {
  if (k.rows() != v.rows()) {
    throw std::invalid_argument("dot_product_head: K and V row counts differ");
  }
  if (q.cols() != params.w_q.rows() || k.cols() != params.w_k.rows() ||
      v.cols() != params.w_v.rows()) {
    throw std::invalid_argument("dot_product_head: input width does not match projection");
  }
  if (params.w_q.cols() != d_k || params.w_k.cols() != d_k ||
      params.w_v.cols() != d_k) {
    throw std::invalid_argument("dot_product_head: projection width is not d_k");
  }
  const Matrix qp = matmul(q, params.w_q);
  const Matrix kp = matmul(k, params.w_k);
  const Matrix logits = qp * kp.transpose() / std::sqrt(static_cast<double>(d_k));
  HeadOutput out;
  out.a = softmax_rows(logits);
  out.z = matmul(out.a, matmul(v, params.w_v));
  return out;
}

Matrix multihead_concat(const std::vector<Matrix>& z_heads, const Matrix& w_o) {
  if (z_heads.empty()) {
    throw std::invalid_argument("multihead_concat: no heads");
  }
  const Index rows = z_heads.front().rows();
  const Index d_k = z_heads.front().cols();
  for (const Matrix& z : z_heads) {
    if (z.rows() != rows || z.cols() != d_k) {
      throw std::invalid_argument("multihead_concat: head outputs disagree in shape");
    }
  }
  const Index m = static_cast<Index>(z_heads.size());
  Matrix concat(rows, m * d_k);
  for (Index i = 0; i < m; ++i) {
    concat.middleCols(i * d_k, d_k) = z_heads[static_cast<size_t>(i)];
  }
  return matmul(concat, w_o);
}

Matrix extract_dot_product_particles(const DotProductMHA& mha,
                                     const ParticleScope& scope) {
  if (mha.heads.empty()) {
    throw std::invalid_argument("extract_dot_product_particles: no heads");
  }
  if (!scope.q && !scope.k && !scope.v) {
    throw std::invalid_argument("extract_dot_product_particles: empty scope");
  }
  const Matrix& first = mha.heads.front().w_q;
  const Index per_matrix = first.rows() * first.cols();
  Matrix particles(mha.m(), scope_width(scope, per_matrix));
  for (Index i = 0; i < mha.m(); ++i) {
    const DotProductHeadParams& h = mha.heads[static_cast<size_t>(i)];
    RowVector row(particles.cols());
    Index at = 0;
    if (scope.q) flatten_into(row, at, h.w_q);
    if (scope.k) flatten_into(row, at, h.w_k);
    if (scope.v) flatten_into(row, at, h.w_v);
    particles.row(i) = row;
  }
  return particles;
}

void inject_dot_product_particles(DotProductMHA& mha, const Matrix& particles,
                                  const ParticleScope& scope) {
  if (particles.rows() != mha.m()) {
    throw std::invalid_argument("inject_dot_product_particles: particle count != heads");
  }
  const Matrix& first = mha.heads.front().w_q;
  const Index per_matrix = first.rows() * first.cols();
  if (particles.cols() != scope_width(scope, per_matrix)) {
    throw std::invalid_argument("inject_dot_product_particles: particle width mismatch");
  }
  for (Index i = 0; i < mha.m(); ++i) {
    DotProductHeadParams& h = mha.heads[static_cast<size_t>(i)];
    const RowVector row = particles.row(i);
    Index at = 0;
    if (scope.q) unflatten_from(row, at, h.w_q);
    if (scope.k) unflatten_from(row, at, h.w_k);
    if (scope.v) unflatten_from(row, at, h.w_v);
  }
}

AdditiveOutput additive_attention(const Matrix& h,
                                  const AdditiveAttnParams& params) {
  if (h.rows() < 1) {
    throw std::invalid_argument("additive_attention: empty input");
  }
  if (params.w.cols() != h.cols()) {
    throw std::invalid_argument("additive_attention: W width " +
                                std::to_string(params.w.cols()) +
                                " does not match input width " +
                                std::to_string(h.cols()));
  }
  if (params.v.rows() != params.w.rows()) {
    throw std::invalid_argument("additive_attention: V rows do not match W rows");
  }
  const Matrix t = (params.w * h.transpose()).array().tanh();  // d_a x n
  AdditiveOutput out;
  out.a = softmax_rows(params.v.transpose() * t);  // M x n
  out.z = matmul(out.a, h);                        // M x d
  return out;
}

}  // namespace rattn
