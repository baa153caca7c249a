#include "rattn/classifier.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rattn/numeric.hpp"

namespace rattn {

namespace {

Matrix gaussian_matrix(RngState& rng, Index rows, Index cols, double scale) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.next_gaussian();
  return m;
}

}  // namespace

Index SentenceClassifier::unmasked_count() const {
  Index n = 0;
  for (bool masked : head_masked) {
    if (!masked) ++n;
  }
  return n;
}

SentenceClassifier SentenceClassifier::make(Index vocab, Index d, Index d_a,
                                            Index m, Index classes,
                                            RngState& rng) {
  if (vocab < 1 || d < 1 || d_a < 1 || m < 1 || classes < 2) {
    throw std::invalid_argument("SentenceClassifier::make: bad dimensions");
  }
  SentenceClassifier c;
  const double d_scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(d_a));
  c.embedding = gaussian_matrix(rng, vocab, d, d_scale);
  c.enc_w = gaussian_matrix(rng, d, d, d_scale);
  c.enc_b = RowVector::Zero(d);
  c.attn.w = gaussian_matrix(rng, d_a, d, d_scale);
  c.attn.v = gaussian_matrix(rng, d_a, m, a_scale) +
             gaussian_matrix(rng, d_a, m, 1e-3);
  c.out_w = Matrix::Zero(m * d, classes);
  c.out_b = RowVector::Zero(classes);
  c.head_masked.assign(static_cast<size_t>(m), false);
  return c;
}

ForwardTrace classifier_forward_trace(const SentenceClassifier& model,
                                      const std::vector<int>& tokens) {
  if (tokens.empty()) {
    throw std::invalid_argument("classifier_forward: empty token sequence");
  }
  const Index n = static_cast<Index>(tokens.size());
  const Index d = model.d();
  const Index m = model.m();

  ForwardTrace tr;
  tr.tokens = tokens;
  tr.e.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const int id = tokens[static_cast<size_t>(i)];
    if (id < 0 || id >= model.vocab()) {
      throw std::invalid_argument("classifier_forward: token id " +
                                  std::to_string(id) + " at position " +
                                  std::to_string(i) + " outside vocab of " +
                                  std::to_string(model.vocab()));
    }
    tr.e.row(i) = model.embedding.row(id);
  }

  tr.pre = matmul(tr.e, model.enc_w);
  tr.pre.rowwise() += model.enc_b;
  tr.h = tr.pre.array().tanh();

  tr.t = (model.attn.w * tr.h.transpose()).array().tanh();
  tr.a = softmax_rows(model.attn.v.transpose() * tr.t);
  tr.z = matmul(tr.a, tr.h);
  for (Index i = 0; i < m; ++i) {
    if (model.head_masked[static_cast<size_t>(i)]) tr.z.row(i).setZero();
  }

  tr.z_flat.resize(m * d);
  for (Index i = 0; i < m; ++i) {
    tr.z_flat.segment(i * d, d) = tr.z.row(i);
  }
  tr.logits = tr.z_flat * model.out_w + model.out_b;
  tr.probs = softmax_rows(tr.logits);
  return tr;
}

RowVector classifier_forward(const SentenceClassifier& model,
                             const std::vector<int>& tokens) {
  return classifier_forward_trace(model, tokens).probs;
}

SentenceClassifier mask_head(const SentenceClassifier& model, Index head) {
  if (head < 0 || head >= model.m()) {
    throw std::invalid_argument("mask_head: head " + std::to_string(head) +
                                " out of range for " + std::to_string(model.m()) +
                                " heads");
  }
  SentenceClassifier out = model;
  out.head_masked[static_cast<size_t>(head)] = true;
  return out;
}

SentenceClassifier unmask_head(const SentenceClassifier& model, Index head) {
  if (head < 0 || head >= model.m()) {
    throw std::invalid_argument("unmask_head: head " + std::to_string(head) +
                                " out of range for " + std::to_string(model.m()) +
                                " heads");
  }
  SentenceClassifier out = model;
  out.head_masked[static_cast<size_t>(head)] = false;
  return out;
}

Matrix extract_particles(const SentenceClassifier& model) {
  return model.attn.v.transpose();
}

void inject_particles(SentenceClassifier& model, const Matrix& particles) {
  if (particles.rows() != model.m() || particles.cols() != model.attn.d_a()) {
    throw std::invalid_argument("inject_particles: shape does not match head layout");
  }
  model.attn.v = particles.transpose();
}

}  // namespace rattn
