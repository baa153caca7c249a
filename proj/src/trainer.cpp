#include "rattn/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>
#include <string>

#include "rattn/kernel.hpp"
#include "rattn/metrics.hpp"
#include "rattn/numeric.hpp"

namespace rattn {

double nll_loss(const Matrix& probs, const std::vector<int>& labels) {
  if (probs.rows() != static_cast<Index>(labels.size())) {
    throw std::invalid_argument("nll_loss: probs/labels length mismatch");
  }
  if (probs.rows() == 0) {
    throw std::invalid_argument("nll_loss: empty batch");
  }
  double total = 0.0;
  for (Index i = 0; i < probs.rows(); ++i) {
    const int y = labels[static_cast<size_t>(i)];
    if (y < 0 || y >= probs.cols()) {
      throw std::invalid_argument("nll_loss: label " + std::to_string(y) +
                                  " out of range at row " + std::to_string(i));
    }
    const double sum = probs.row(i).sum();
    if (std::abs(sum - 1.0) > 1e-8) {
      throw std::invalid_argument("nll_loss: row " + std::to_string(i) +
                                  " does not sum to 1");
    }
    total -= std::log(std::max(probs(i, y), 1e-12));
  }
  return total / static_cast<double>(probs.rows());
}

Gradients Gradients::zero(const SentenceClassifier& model) {
  Gradients g;
  g.embedding = Matrix::Zero(model.embedding.rows(), model.embedding.cols());
  g.enc_w = Matrix::Zero(model.enc_w.rows(), model.enc_w.cols());
  g.enc_b = RowVector::Zero(model.enc_b.size());
  g.attn_w = Matrix::Zero(model.attn.w.rows(), model.attn.w.cols());
  g.particles = Matrix::Zero(model.m(), model.attn.d_a());
  g.out_w = Matrix::Zero(model.out_w.rows(), model.out_w.cols());
  g.out_b = RowVector::Zero(model.out_b.size());
  return g;
}

namespace {

std::vector<Index> active_heads(const SentenceClassifier& model) {
  std::vector<Index> active;
  for (Index i = 0; i < model.m(); ++i) {
    if (!model.head_masked[static_cast<size_t>(i)]) active.push_back(i);
  }
  return active;
}

// Derivative of row-softmax given output row a and upstream da:
// ds = a .* (da - <da, a>).
RowVector softmax_backward_row(const RowVector& a, const RowVector& da) {
  const double dot = da.dot(a);
  return a.cwiseProduct(da.array().operator-(dot).matrix());
}

}  // namespace

BatchResult backward(const SentenceClassifier& model,
                     const std::vector<Example>& batch, const RegConfig& reg) {
  if (batch.empty()) {
    throw std::invalid_argument("backward: empty batch");
  }
  const Index m = model.m();
  const Index d = model.d();
  const std::vector<Index> active = active_heads(model);

  BatchResult res;
  res.grads = Gradients::zero(model);
  double loss_sum = 0.0;

  for (const Example& ex : batch) {
    const ForwardTrace tr = classifier_forward_trace(model, ex.tokens);
    if (ex.label < 0 || ex.label >= model.classes()) {
      throw std::invalid_argument("backward: label " + std::to_string(ex.label) +
                                  " out of range");
    }
    loss_sum -= std::log(std::max(tr.probs(ex.label), 1e-12));

    // Output layer.
    RowVector dlogits = tr.probs;
    dlogits(ex.label) -= 1.0;
    res.grads.out_w += tr.z_flat.transpose() * dlogits;
    res.grads.out_b += dlogits;

    const RowVector dz_flat = dlogits * model.out_w.transpose();
    Matrix dz(m, d);
    for (Index i = 0; i < m; ++i) {
      if (model.head_masked[static_cast<size_t>(i)]) {
        dz.row(i).setZero();  // the graph is cut at masked rows
      } else {
        dz.row(i) = dz_flat.segment(i * d, d);
      }
    }

    if (reg.kind == RegKind::disagreement && active.size() >= 2) {
      Matrix z_act(static_cast<Index>(active.size()), d);
      for (size_t k = 0; k < active.size(); ++k) z_act.row(static_cast<Index>(k)) = tr.z.row(active[k]);
      const RegOutput r = disagreement_regularizer(z_act);
      loss_sum += reg.lambda * r.penalty;
      for (size_t k = 0; k < active.size(); ++k) {
        dz.row(active[k]) += reg.lambda * r.grad.row(static_cast<Index>(k));
      }
    }

    Matrix da = dz * tr.h.transpose();   // M x n
    Matrix dh = tr.a.transpose() * dz;   // n x d

    if (reg.kind == RegKind::frobenius && !active.empty()) {
      Matrix a_act(static_cast<Index>(active.size()), tr.a.cols());
      for (size_t k = 0; k < active.size(); ++k) a_act.row(static_cast<Index>(k)) = tr.a.row(active[k]);
      const RegOutput r = frobenius_regularizer(a_act);
      loss_sum += reg.lambda * r.penalty;
      for (size_t k = 0; k < active.size(); ++k) {
        da.row(active[k]) += reg.lambda * r.grad.row(static_cast<Index>(k));
      }
    }

    // Attention softmax; masked heads have zero upstream rows, and their ds
    // rows stay zero, cutting every path into v_i.
    Matrix ds(m, tr.a.cols());
    for (Index i = 0; i < m; ++i) {
      ds.row(i) = softmax_backward_row(tr.a.row(i), da.row(i));
    }

    res.grads.particles += (tr.t * ds.transpose()).transpose();  // M x d_a
    const Matrix dt = model.attn.v * ds;                         // d_a x n
    const Matrix dwh = dt.cwiseProduct((1.0 - tr.t.array().square()).matrix());
    res.grads.attn_w += dwh * tr.h;
    dh += dwh.transpose() * model.attn.w;

    // Shared encoder.
    const Matrix dpre = dh.cwiseProduct((1.0 - tr.h.array().square()).matrix());
    res.grads.enc_w += tr.e.transpose() * dpre;
    res.grads.enc_b += dpre.colwise().sum();
    const Matrix de = dpre * model.enc_w.transpose();
    for (Index i = 0; i < de.rows(); ++i) {
      res.grads.embedding.row(tr.tokens[static_cast<size_t>(i)]) += de.row(i);
    }
  }

  const double scale = 1.0 / static_cast<double>(batch.size());
  res.loss = loss_sum * scale;
  res.grads.embedding *= scale;
  res.grads.enc_w *= scale;
  res.grads.enc_b *= scale;
  res.grads.attn_w *= scale;
  res.grads.particles *= scale;
  res.grads.out_w *= scale;
  res.grads.out_b *= scale;

  check_finite(res.grads.embedding, "gradient/embedding");
  check_finite(res.grads.enc_w, "gradient/enc_w");
  check_finite(Matrix(res.grads.enc_b), "gradient/enc_b");
  check_finite(res.grads.attn_w, "gradient/attn_w");
  check_finite(res.grads.particles, "gradient/heads");
  check_finite(res.grads.out_w, "gradient/out_w");
  check_finite(Matrix(res.grads.out_b), "gradient/out_b");
  return res;
}

Vector finite_diff_oracle(const std::function<double(const Vector&)>& lossfn,
                          const Vector& params, double step) {
  if (!(step > 0.0)) {
    throw std::invalid_argument("finite_diff_oracle: step must be > 0");
  }
  Vector grad(params.size());
  Vector x = params;
  for (Index k = 0; k < params.size(); ++k) {
    const double saved = x(k);
    x(k) = saved + step;
    const double up = lossfn(x);
    x(k) = saved - step;
    const double down = lossfn(x);
    x(k) = saved;
    grad(k) = (up - down) / (2.0 * step);
  }
  return grad;
}

namespace {

Index parameter_count(const SentenceClassifier& model) {
  return model.embedding.size() + model.enc_w.size() + model.enc_b.size() +
         model.attn.w.size() + model.attn.v.size() + model.out_w.size() +
         model.out_b.size();
}

void write_block(Vector& flat, Index& at, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) flat(at++) = m(i, j);
}

void read_block(const Vector& flat, Index& at, Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = flat(at++);
}

}  // namespace

Vector flatten_parameters(const SentenceClassifier& model) {
  Vector flat(parameter_count(model));
  Index at = 0;
  write_block(flat, at, model.embedding);
  write_block(flat, at, model.enc_w);
  write_block(flat, at, Matrix(model.enc_b));
  write_block(flat, at, model.attn.w);
  write_block(flat, at, model.attn.v);
  write_block(flat, at, model.out_w);
  write_block(flat, at, Matrix(model.out_b));
  return flat;
}

void unflatten_parameters(SentenceClassifier& model, const Vector& flat) {
  if (flat.size() != parameter_count(model)) {
    throw std::invalid_argument("unflatten_parameters: size mismatch");
  }
  Index at = 0;
  read_block(flat, at, model.embedding);
  read_block(flat, at, model.enc_w);
  Matrix enc_b(1, model.enc_b.size());
  read_block(flat, at, enc_b);
  model.enc_b = enc_b.row(0);
  read_block(flat, at, model.attn.w);
  read_block(flat, at, model.attn.v);
  read_block(flat, at, model.out_w);
  Matrix out_b(1, model.out_b.size());
  read_block(flat, at, out_b);
  model.out_b = out_b.row(0);
}

Vector flatten_gradients(const Gradients& grads, const SentenceClassifier& model) {
  Vector flat(parameter_count(model));
  Index at = 0;
  write_block(flat, at, grads.embedding);
  write_block(flat, at, grads.enc_w);
  write_block(flat, at, Matrix(grads.enc_b));
  write_block(flat, at, grads.attn_w);
  // particles are stored per-head as rows; attn.v keeps heads in columns.
  write_block(flat, at, Matrix(grads.particles.transpose()));
  write_block(flat, at, grads.out_w);
  write_block(flat, at, Matrix(grads.out_b));
  return flat;
}

TrainState make_train_state(const SentenceClassifier& model,
                            const TrainConfig& config) {
  TrainState st;
  st.emb = AdamState::make(model.embedding.rows(), model.embedding.cols(), config.omega);
  st.enc_w = AdamState::make(model.enc_w.rows(), model.enc_w.cols(), config.omega);
  st.enc_b = AdamState::make(1, model.enc_b.size(), config.omega);
  st.attn_w = AdamState::make(model.attn.w.rows(), model.attn.w.cols(), config.omega);
  st.out_w = AdamState::make(model.out_w.rows(), model.out_w.cols(), config.omega);
  st.out_b = AdamState::make(1, model.out_b.size(), config.omega);
  st.theta = AdamState::make(model.m(), model.attn.d_a(), config.omega);
  st.noise = RngState::make(config.seed, config.sampler.rule == UpdateRule::sgld
                                             ? Stream::sgld_noise
                                             : Stream::spos_noise);
  return st;
}

namespace {

double omega_norm(const Gradients& g) {
  return std::sqrt(g.embedding.squaredNorm() + g.enc_w.squaredNorm() +
                   g.enc_b.squaredNorm() + g.attn_w.squaredNorm() +
                   g.out_w.squaredNorm() + g.out_b.squaredNorm());
}

void scale_omega(Gradients& g, double factor) {
  g.embedding *= factor;
  g.enc_w *= factor;
  g.enc_b *= factor;
  g.attn_w *= factor;
  g.out_w *= factor;
  g.out_b *= factor;
}

void adam_row_vector(AdamState& state, RowVector& params, const RowVector& grads) {
  Matrix p = params;
  adam_step(state, p, Matrix(grads));
  params = p.row(0);
}

}  // namespace

double train_step(SentenceClassifier& model, const std::vector<Example>& batch,
                  const TrainConfig& config, TrainState& state) {
  BatchResult res = backward(model, batch, config.reg);

  // Shared parameters: global-norm clip, then Adam, in a fixed group order.
  const double onorm = omega_norm(res.grads);
  if (config.clip_norm > 0.0 && onorm > config.clip_norm) {
    scale_omega(res.grads, config.clip_norm / onorm);
  }
  adam_step(state.emb, model.embedding, res.grads.embedding);
  adam_step(state.enc_w, model.enc_w, res.grads.enc_w);
  adam_row_vector(state.enc_b, model.enc_b, res.grads.enc_b);
  adam_step(state.attn_w, model.attn.w, res.grads.attn_w);
  adam_step(state.out_w, model.out_w, res.grads.out_w);
  adam_row_vector(state.out_b, model.out_b, res.grads.out_b);

  // Head particles: only unmasked heads take part in phi and the update.
  const std::vector<Index> active = active_heads(model);
  state.step += 1;
  if (active.empty()) return res.loss;

  const Index n_act = static_cast<Index>(active.size());
  Matrix act_values(n_act, model.attn.d_a());
  Matrix act_grad(n_act, model.attn.d_a());
  for (Index k = 0; k < n_act; ++k) {
    act_values.row(k) = model.attn.v.col(active[static_cast<size_t>(k)]).transpose();
    act_grad.row(k) = res.grads.particles.row(active[static_cast<size_t>(k)]);
  }
  act_grad *= config.sampler.likelihood_scale;

  ParticleSet particles(act_values);
  Matrix grad_u = grad_potential(act_grad, particles, config.sampler.prior);
  const double unorm = grad_u.norm();
  if (config.clip_norm > 0.0 && unorm > config.clip_norm) {
    grad_u *= config.clip_norm / unorm;
  }

  const bool cosine_drift =
      config.reg.kind == RegKind::cosine_param &&
      config.reg.variant != CosineVariant::swap_ij_smooth && n_act >= 2;
  const bool cosine_smooth = config.reg.kind == RegKind::cosine_param &&
                             config.reg.variant == CosineVariant::swap_ij_smooth;
  if (cosine_smooth && config.sampler.rule != UpdateRule::plain) {
    throw std::invalid_argument(
        "train_step: the smoothed cosine variant is itself a sampler update; "
        "use rule=plain with it");
  }

  AdamState* theta_opt = config.particles_use_adam ? &state.theta : nullptr;
  if (theta_opt != nullptr && theta_opt->m.rows() != n_act) {
    // Adam moments track the active set; masking mid-run resets them.
    state.theta = AdamState::make(n_act, model.attn.d_a(), config.omega);
  }

  if (config.sampler.rule == UpdateRule::sgld) {
    Matrix drift = grad_u;
    if (cosine_drift) {
      const RegOutput r = cosine_param_regularizer(act_values, config.reg.variant);
      drift -= config.reg.lambda * r.grad;
    }
    for (Index k = 0; k < n_act; ++k) {
      Vector row = particles.values.row(k).transpose();
      Vector g = drift.row(k).transpose();
      particles.values.row(k) =
          sgld_step(row, g, config.sampler.stepsize, state.noise).transpose();
    }
  } else {
    Matrix phi;
    if (cosine_smooth) {
      SamplerConfig bridge = config.sampler;
      bridge.kernel.kind = KernelKind::cosine;
      bridge.repulsive_weight = config.reg.lambda;
      phi = svgd_phi(particles, grad_u, bridge);
    } else if (config.sampler.rule == UpdateRule::svgd) {
      phi = svgd_phi(particles, grad_u, config.sampler);
    } else if (config.sampler.rule == UpdateRule::spos) {
      phi = spos_phi(particles, grad_u, config.sampler, state.noise);
    } else {
      phi = -grad_u;
    }
    if (cosine_drift) {
      const RegOutput r = cosine_param_regularizer(act_values, config.reg.variant);
      phi += config.reg.lambda * r.grad;
    }
    apply_update(particles, phi, config.sampler, theta_opt);
  }

  for (Index k = 0; k < n_act; ++k) {
    model.attn.v.col(active[static_cast<size_t>(k)]) =
        particles.values.row(k).transpose();
  }
  return res.loss;
}

namespace {

double dataset_loss(const SentenceClassifier& model,
                    const std::vector<Example>& examples, const RegConfig& reg) {
  // Loss-only evaluation used for the epoch-0 history row; backward would
  // also work but wastes the gradient pass.
  const std::vector<Index> active = active_heads(model);
  double total = 0.0;
  for (const Example& ex : examples) {
    const ForwardTrace tr = classifier_forward_trace(model, ex.tokens);
    total -= std::log(std::max(tr.probs(ex.label), 1e-12));
    if (reg.kind == RegKind::disagreement && active.size() >= 2) {
      Matrix z_act(static_cast<Index>(active.size()), model.d());
      for (size_t k = 0; k < active.size(); ++k) z_act.row(static_cast<Index>(k)) = tr.z.row(active[k]);
      total += reg.lambda * disagreement_regularizer(z_act).penalty;
    } else if (reg.kind == RegKind::frobenius && !active.empty()) {
      Matrix a_act(static_cast<Index>(active.size()), tr.a.cols());
      for (size_t k = 0; k < active.size(); ++k) a_act.row(static_cast<Index>(k)) = tr.a.row(active[k]);
      total += reg.lambda * frobenius_regularizer(a_act).penalty;
    }
  }
  return total / static_cast<double>(examples.size());
}

}  // namespace

TrainResult train(const TrainConfig& config, const DataSplits& splits) {
  if (splits.train.empty() || splits.val.empty()) {
    throw std::invalid_argument("train: train and validation splits must be nonempty");
  }
  if (config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("train: epochs and batch_size must be >= 1");
  }

  RngState init = RngState::make(config.seed, Stream::init);
  SentenceClassifier model = SentenceClassifier::make(
      splits.train.vocab, config.d, config.d_a, config.m, splits.train.classes,
      init);
  TrainState state = make_train_state(model, config);
  RngState shuffle_rng = RngState::make(config.seed, Stream::shuffle);

  TrainResult result;
  result.history.epochs.reserve(static_cast<size_t>(config.epochs) + 1);

  auto record = [&](int epoch, double train_loss, double seconds) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = train_loss;
    rec.val_acc = accuracy(model, splits.val);
    rec.dist = model.m() >= 2 ? model_head_distance(model, splits.val) : 0.0;
    rec.seconds = config.record_timing ? seconds : 0.0;
    result.history.epochs.push_back(rec);
    if (result.history.epochs.size() == 1 ||
        rec.val_acc > result.history.best_val_acc) {
      result.history.best_val_acc = rec.val_acc;
      result.history.best_epoch = epoch;
      result.model = model;
    }
  };

  record(0, dataset_loss(model, splits.train.examples, config.reg), 0.0);

  std::vector<size_t> order(splits.train.examples.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  TrainConfig epoch_config = config;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    shuffle(shuffle_rng, order);

    double loss_sum = 0.0;
    size_t seen = 0;
    std::vector<Example> batch;
    batch.reserve(static_cast<size_t>(config.batch_size));
    for (size_t at = 0; at < order.size(); at += static_cast<size_t>(config.batch_size)) {
      batch.clear();
      const size_t end = std::min(order.size(), at + static_cast<size_t>(config.batch_size));
      for (size_t i = at; i < end; ++i) {
        batch.push_back(splits.train.examples[order[i]]);
      }
      loss_sum += train_step(model, batch, epoch_config, state) *
                  static_cast<double>(batch.size());
      seen += batch.size();
    }
    epoch_config.sampler.stepsize *= config.sampler.stepsize_decay;

    const auto t1 = std::chrono::steady_clock::now();
    const double seconds = std::chrono::duration<double>(t1 - t0).count();
    record(epoch, loss_sum / static_cast<double>(seen), seconds);
  }
  result.final = model;
  return result;
}

}  // namespace rattn
