#pragma once

#include <vector>

#include "rattn/types.hpp"

namespace rattn {

// Per-head projections for scaled dot-product attention; each is
// d_model x d_k.
struct DotProductHeadParams {
  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
};

// Full multi-head block: M projection triples plus the output projection
// W_O of shape (M * d_k) x d_model.
struct DotProductMHA {
  std::vector<DotProductHeadParams> heads;
  Matrix w_o;
  Index d_k = 0;

  Index m() const { return static_cast<Index>(heads.size()); }
};

// Which projection matrices count as the head's particle. Mirrors the
// option of repulsing only a subset of {Q, K, V}.
struct ParticleScope {
  bool q = true;
  bool k = true;
  bool v = true;
};

// One head of scaled dot-product attention:
//   A = softmax_rows(Q W_Q (K W_K)^T / sqrt(d_k)),  Z = A (V W_V).
// Returns {A (n_q x n_k), Z (n_q x d_k)}.
struct HeadOutput {
  Matrix a;
  Matrix z;
};
HeadOutput dot_product_head(const Matrix& q, const Matrix& k, const Matrix& v,
                            const DotProductHeadParams& params, Index d_k);

// Concatenate the per-head outputs along the width and project:
// [Z_1 | ... | Z_M] W_O.
Matrix multihead_concat(const std::vector<Matrix>& z_heads, const Matrix& w_o);

// Flatten each head's in-scope projections into one particle row / read a
// particle row back into the projections. Row layout: W_Q, then W_K, then
// W_V (row-major within each), restricted to the scope.
Matrix extract_dot_product_particles(const DotProductMHA& mha,
                                     const ParticleScope& scope);
void inject_dot_product_particles(DotProductMHA& mha, const Matrix& particles,
                                  const ParticleScope& scope);

// Additive self-attentive parameters: W is shared across heads, column i of
// V is the per-head vector v_i (the particle).
struct AdditiveAttnParams {
  Matrix w;  // d_a x d
  Matrix v;  // d_a x M

  Index m() const { return v.cols(); }
  Index d_a() const { return w.rows(); }
};

// A = softmax_rows(V^T tanh(W H^T)) of shape M x n; Z = A H of shape M x d.
struct AdditiveOutput {
  Matrix a;
  Matrix z;
};
AdditiveOutput additive_attention(const Matrix& h,
                                  const AdditiveAttnParams& params);

}  // namespace rattn
