#pragma once

#include <vector>

#include "rattn/attention.hpp"
#include "rattn/rng.hpp"
#include "rattn/types.hpp"

namespace rattn {

// Desk-scale sentence classifier: token embedding -> shared tanh encoder ->
// additive multi-head attention -> masked head outputs, concatenated ->
// affine -> softmax. The per-head vectors v_i are the particles.
struct SentenceClassifier {
  Matrix embedding;       // vocab x d
  Matrix enc_w;           // d x d
  RowVector enc_b;        // 1 x d
  AdditiveAttnParams attn;
  Matrix out_w;           // (M*d) x classes
  RowVector out_b;        // 1 x classes
  std::vector<bool> head_masked;

  Index vocab() const { return embedding.rows(); }
  Index d() const { return embedding.cols(); }
  Index m() const { return attn.m(); }
  Index classes() const { return out_b.size(); }
  Index unmasked_count() const;

  // Fresh model; output layer starts at zero so an untrained classifier
  // yields uniform probabilities. Head vectors get independent draws plus a
  // small jitter so no two particles coincide (coincident particles feel no
  // repulsion).
  static SentenceClassifier make(Index vocab, Index d, Index d_a, Index m,
                                 Index classes, RngState& rng);
};

// Everything the backward pass and the attention dumps need from one
// forward evaluation.
struct ForwardTrace {
  std::vector<int> tokens;
  Matrix e;          // n x d    embedded tokens
  Matrix pre;        // n x d    encoder pre-activation
  Matrix h;          // n x d    tanh(pre)
  Matrix t;          // d_a x n  tanh(W h^T)
  Matrix a;          // M x n    attention weights
  Matrix z;          // M x d    head outputs, masked rows zeroed
  RowVector z_flat;  // 1 x (M*d)
  RowVector logits;  // 1 x classes
  RowVector probs;   // 1 x classes
};

ForwardTrace classifier_forward_trace(const SentenceClassifier& model,
                                      const std::vector<int>& tokens);
RowVector classifier_forward(const SentenceClassifier& model,
                             const std::vector<int>& tokens);

// Masking zeroes head `head`'s row of Z at inference; parameters are
// untouched and unmask restores the original outputs exactly.
SentenceClassifier mask_head(const SentenceClassifier& model, Index head);
SentenceClassifier unmask_head(const SentenceClassifier& model, Index head);

// Particle view of the heads: row i = v_i (column i of attn.v).
Matrix extract_particles(const SentenceClassifier& model);
void inject_particles(SentenceClassifier& model, const Matrix& particles);

}  // namespace rattn
