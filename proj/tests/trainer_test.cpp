#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rattn/kernel.hpp"
#include "rattn/metrics.hpp"
#include "rattn/numeric.hpp"
#include "rattn/rng.hpp"
#include "rattn/trainer.hpp"

using namespace rattn;

namespace {

Matrix random_matrix(RngState& r, Index rows, Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * r.next_gaussian();
  return m;
}

// Small random model with a non-zero output layer (make() zero-inits it,
// which would silence every upstream gradient).
SentenceClassifier random_model(RngState& r, Index vocab, Index d, Index d_a,
                                Index m, Index classes) {
  SentenceClassifier model = SentenceClassifier::make(vocab, d, d_a, m, classes, r);
  model.out_w = random_matrix(r, m * d, classes, 0.5);
  model.out_b = random_matrix(r, 1, classes, 0.1).row(0);
  return model;
}

std::vector<Example> random_batch(RngState& r, Index vocab, Index classes,
                                  int count) {
  std::vector<Example> batch;
  for (int b = 0; b < count; ++b) {
    Example ex;
    const int len = 3 + static_cast<int>(r.next_below(4));
    for (int i = 0; i < len; ++i) {
      ex.tokens.push_back(static_cast<int>(r.next_below(static_cast<uint64_t>(vocab))));
    }
    ex.label = static_cast<int>(r.next_below(static_cast<uint64_t>(classes)));
    batch.push_back(ex);
  }
  return batch;
}

// Marker task: the first token determines the label. Learnable via the
// embedding table alone, so it trains quickly and deterministically.
DataSplits marker_splits(RngState& r, Index vocab, Index classes, int n_train,
                         int n_val) {
  DataSplits splits;
  splits.train.vocab = splits.val.vocab = splits.test.vocab = vocab;
  splits.train.classes = splits.val.classes = splits.test.classes = classes;
  auto gen = [&](int count) {
    std::vector<Example> out;
    for (int i = 0; i < count; ++i) {
      Example ex;
      ex.label = static_cast<int>(r.next_below(static_cast<uint64_t>(classes)));
      ex.tokens.push_back(ex.label);  // marker token = label id
      for (int t = 0; t < 5; ++t) {
        ex.tokens.push_back(static_cast<int>(
            classes + static_cast<Index>(r.next_below(static_cast<uint64_t>(vocab - classes)))));
      }
      out.push_back(ex);
    }
    return out;
  };
  splits.train.examples = gen(n_train);
  splits.val.examples = gen(n_val);
  splits.test.examples = gen(n_val);
  return splits;
}

struct GroupSlice {
  const char* name;
  Index offset;
  Index size;
};

std::vector<GroupSlice> parameter_groups(const SentenceClassifier& m) {
  std::vector<GroupSlice> groups;
  Index at = 0;
  auto push = [&](const char* name, Index size) {
    groups.push_back({name, at, size});
    at += size;
  };
  push("embedding", m.embedding.size());
  push("enc_w", m.enc_w.size());
  push("enc_b", m.enc_b.size());
  push("attn_w", m.attn.w.size());
  push("attn_v", m.attn.v.size());
  push("out_w", m.out_w.size());
  push("out_b", m.out_b.size());
  return groups;
}

}  // namespace

TEST_CASE("nll_loss hand values") {
  Matrix p(1, 4);
  p << 1.0, 0.0, 0.0, 0.0;
  CHECK(nll_loss(p, {0}) == doctest::Approx(0.0).epsilon(1e-9));

  Matrix u = Matrix::Constant(1, 4, 0.25);
  CHECK(nll_loss(u, {2}) == doctest::Approx(std::log(4.0)).epsilon(1e-12));

  Matrix two(2, 2);
  two << 0.5, 0.5, 0.25, 0.75;
  CHECK(nll_loss(two, {0, 0}) ==
        doctest::Approx((std::log(2.0) + std::log(4.0)) / 2.0).epsilon(1e-12));
  CHECK(nll_loss(two, {0, 0}) == doctest::Approx(1.03972).epsilon(1e-4));

  CHECK_THROWS_AS(nll_loss(two, {0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(nll_loss(two, {0}), std::invalid_argument);
}

TEST_CASE("finite_diff_oracle: quadratic and linear probes") {
  auto quad = [](const Vector& x) { return x(0) * x(0); };
  Vector at(1);
  at << 3.0;
  CHECK(finite_diff_oracle(quad, at)(0) == doctest::Approx(6.0).epsilon(1e-6));

  auto lin = [](const Vector& x) { return 2.0 * x(0) - 7.0 * x(1); };
  Vector at2(2);
  at2 << 0.3, -1.2;
  Vector g = finite_diff_oracle(lin, at2, 1e-3);
  CHECK(g(0) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(g(1) == doctest::Approx(-7.0).epsilon(1e-9));

  CHECK_THROWS_AS(finite_diff_oracle(quad, at, 0.0), std::invalid_argument);
}

TEST_CASE("gradient gate: backward matches central differences on every group") {
  RngState r = RngState::make(100, Stream::test);
  for (int rep = 0; rep < 20; ++rep) {
    SentenceClassifier model = random_model(r, 12, 4, 3, 3, 3);
    std::vector<Example> batch = random_batch(r, 12, 3, 3);

    RegConfig reg;
    if (rep % 3 == 1) {
      reg.kind = RegKind::frobenius;
      reg.lambda = 0.5;
    } else if (rep % 3 == 2) {
      reg.kind = RegKind::disagreement;
      reg.lambda = 0.7;
    }

    const BatchResult res = backward(model, batch, reg);
    const Vector analytic = flatten_gradients(res.grads, model);

    auto lossfn = [&](const Vector& x) {
      SentenceClassifier probe = model;
      unflatten_parameters(probe, x);
      return backward(probe, batch, reg).loss;
    };
    const Vector fd = finite_diff_oracle(lossfn, flatten_parameters(model));

    for (const GroupSlice& g : parameter_groups(model)) {
      const double diff = (analytic.segment(g.offset, g.size) -
                           fd.segment(g.offset, g.size)).norm();
      const double rel = diff / (fd.segment(g.offset, g.size).norm() + 1e-8);
      CAPTURE(rep);
      CAPTURE(g.name);
      CHECK(rel < 1e-4);
    }
  }
}

TEST_CASE("backward: output-bias gradient is p minus onehot for one example") {
  RngState r = RngState::make(101, Stream::init);
  SentenceClassifier model = SentenceClassifier::make(10, 4, 3, 2, 4, r);
  // Zero output layer -> uniform prediction.
  Example ex;
  ex.tokens = {1, 2, 3};
  ex.label = 2;
  const BatchResult res = backward(model, {ex}, RegConfig{});
  for (Index c = 0; c < 4; ++c) {
    const double expect = 0.25 - (c == 2 ? 1.0 : 0.0);
    CHECK(res.grads.out_b(c) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("backward: masked head gets an identically zero particle gradient") {
  RngState r = RngState::make(102, Stream::test);
  SentenceClassifier model = random_model(r, 15, 4, 3, 4, 3);
  model = mask_head(model, 1);
  std::vector<Example> batch = random_batch(r, 15, 3, 4);
  const BatchResult res = backward(model, batch, RegConfig{});
  CHECK(res.grads.particles.row(1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(res.grads.particles.row(0).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("frobenius_regularizer: hand values and finite differences") {
  // Orthonormal rows: penalty 0.
  Matrix eye(2, 3);
  eye << 1, 0, 0, 0, 1, 0;
  CHECK(frobenius_regularizer(eye).penalty == doctest::Approx(0.0));

  // Identical one-hot rows: A A^T is all-ones, penalty 2.
  Matrix dup(2, 2);
  dup << 1, 0, 1, 0;
  CHECK(frobenius_regularizer(dup).penalty == doctest::Approx(2.0));

  RngState r = RngState::make(103, Stream::test);
  Matrix a = softmax_rows(random_matrix(r, 3, 5));
  const RegOutput out = frobenius_regularizer(a);
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      const double h = 1e-6;
      Matrix up = a, down = a;
      up(i, j) += h;
      down(i, j) -= h;
      const double fd = (frobenius_regularizer(up).penalty -
                         frobenius_regularizer(down).penalty) / (2.0 * h);
      CHECK(out.grad(i, j) == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("disagreement_regularizer: hand values, rejection, finite differences") {
  Matrix same(3, 2);
  same << 1, 1, 1, 1, 1, 1;
  CHECK(disagreement_regularizer(same).penalty == doctest::Approx(1.0));

  Matrix ortho(2, 2);
  ortho << 1, 0, 0, 1;
  CHECK(disagreement_regularizer(ortho).penalty == doctest::Approx(0.0));

  Matrix pair(2, 2);
  pair << 1, 0, 1, 1;
  CHECK(disagreement_regularizer(pair).penalty ==
        doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(disagreement_regularizer(pair).penalty == doctest::Approx(0.70711).epsilon(1e-4));

  Matrix zero(2, 2);
  zero << 1, 0, 0, 0;
  CHECK_THROWS_AS(disagreement_regularizer(zero), std::invalid_argument);
  CHECK_THROWS_AS(disagreement_regularizer(Matrix::Ones(1, 3)), std::invalid_argument);

  RngState r = RngState::make(104, Stream::test);
  Matrix z = random_matrix(r, 4, 3);
  const RegOutput out = disagreement_regularizer(z);
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < z.cols(); ++j) {
      const double h = 1e-6;
      Matrix up = z, down = z;
      up(i, j) += h;
      down(i, j) -= h;
      const double fd = (disagreement_regularizer(up).penalty -
                         disagreement_regularizer(down).penalty) / (2.0 * h);
      CHECK(out.grad(i, j) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("cosine_param_regularizer: collapse is stationary for the plain variant") {
  Matrix dup(2, 3);
  dup << 1, 2, 3, 1, 2, 3;
  const RegOutput out = cosine_param_regularizer(dup, CosineVariant::plain);
  CHECK(out.penalty == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(out.grad.cwiseAbs().maxCoeff() < 1e-14);

  CHECK_THROWS_AS(cosine_param_regularizer(Matrix::Ones(1, 3), CosineVariant::plain),
                  std::invalid_argument);
  Matrix zero(2, 2);
  zero << 1, 0, 0, 0;
  CHECK_THROWS_AS(cosine_param_regularizer(zero, CosineVariant::plain),
                  std::invalid_argument);
}

TEST_CASE("cosine_param_regularizer: plain rows scale the penalty gradient") {
  // The plain variant's row i is (1/M) sum_{j != i} d cos(t_i, t_j)/d t_i.
  // The penalty is the mean over M(M-1)/2 unordered pairs, so its true
  // gradient carries a 1/pairs factor instead: the rows must equal
  // (M-1)/2 times the finite-difference gradient of the penalty.
  RngState r = RngState::make(117, Stream::test);
  Matrix p = random_matrix(r, 3, 4);
  const RegOutput out = cosine_param_regularizer(p, CosineVariant::plain);
  const double factor = (3.0 - 1.0) / 2.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index j = 0; j < p.cols(); ++j) {
      const double h = 1e-6;
      Matrix up = p, down = p;
      up(i, j) += h;
      down(i, j) -= h;
      const double fd =
          (cosine_param_regularizer(up, CosineVariant::plain).penalty -
           cosine_param_regularizer(down, CosineVariant::plain).penalty) /
          (2.0 * h);
      CHECK(out.grad(i, j) == doctest::Approx(factor * fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("cosine_param_regularizer: swap variant uses the other argument's gradient") {
  RngState r = RngState::make(105, Stream::test);
  Matrix p = random_matrix(r, 3, 4);
  const RegOutput swap = cosine_param_regularizer(p, CosineVariant::swap_ij);
  for (Index i = 0; i < 3; ++i) {
    RowVector expect = RowVector::Zero(4);
    for (Index j = 0; j < 3; ++j) {
      if (j != i) expect += cosine_grad_first(p.row(j), p.row(i));
    }
    expect /= 3.0;
    CHECK((RowVector(swap.grad.row(i)) - expect).norm() < 1e-14);
  }

  const RegOutput smooth = cosine_param_regularizer(p, CosineVariant::swap_ij_smooth);
  CHECK(smooth.grad.size() == 0);
  CHECK(smooth.penalty == doctest::Approx(swap.penalty));
}

TEST_CASE("plain rule reproduces a sampler-free reference implementation") {
  RngState data_rng = RngState::make(106, Stream::test);
  DataSplits splits = marker_splits(data_rng, 20, 3, 40, 20);

  TrainConfig config;
  config.sampler.rule = UpdateRule::plain;
  config.sampler.stepsize = 0.1;
  config.epochs = 1;
  config.batch_size = 8;
  config.seed = 7;
  config.clip_norm = 1e12;  // disable clipping so the reference stays vanilla
  config.d = 6;
  config.d_a = 5;
  config.m = 3;

  // Library path: 50 plain train_steps over fixed batches.
  RngState init_a = RngState::make(config.seed, Stream::init);
  SentenceClassifier lib = SentenceClassifier::make(20, 6, 5, 3, 3, init_a);
  TrainState state = make_train_state(lib, config);
  std::vector<Example> batch(splits.train.examples.begin(),
                             splits.train.examples.begin() + 8);
  for (int step = 0; step < 50; ++step) train_step(lib, batch, config, state);

  // Reference: same backward, Adam on shared parameters, vanilla SGD on the
  // head vectors; no sampler machinery at all.
  RngState init_b = RngState::make(config.seed, Stream::init);
  SentenceClassifier ref = SentenceClassifier::make(20, 6, 5, 3, 3, init_b);
  AdamState emb = AdamState::make(ref.embedding.rows(), ref.embedding.cols(), config.omega);
  AdamState enc_w = AdamState::make(6, 6, config.omega);
  AdamState enc_b = AdamState::make(1, 6, config.omega);
  AdamState attn_w = AdamState::make(5, 6, config.omega);
  AdamState out_w = AdamState::make(18, 3, config.omega);
  AdamState out_b = AdamState::make(1, 3, config.omega);
  for (int step = 0; step < 50; ++step) {
    BatchResult res = backward(ref, batch, RegConfig{});
    adam_step(emb, ref.embedding, res.grads.embedding);
    adam_step(enc_w, ref.enc_w, res.grads.enc_w);
    Matrix eb = ref.enc_b;
    adam_step(enc_b, eb, Matrix(res.grads.enc_b));
    ref.enc_b = eb.row(0);
    adam_step(attn_w, ref.attn.w, res.grads.attn_w);
    adam_step(out_w, ref.out_w, res.grads.out_w);
    Matrix ob = ref.out_b;
    adam_step(out_b, ob, Matrix(res.grads.out_b));
    ref.out_b = ob.row(0);
    ref.attn.v -= config.sampler.stepsize * res.grads.particles.transpose();
  }

  CHECK((flatten_parameters(lib) - flatten_parameters(ref)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-head svgd training equals plain training exactly") {
  RngState data_rng = RngState::make(107, Stream::test);
  DataSplits splits = marker_splits(data_rng, 20, 3, 60, 20);

  TrainConfig plain;
  plain.sampler.rule = UpdateRule::plain;
  plain.sampler.stepsize = 0.1;
  plain.epochs = 3;
  plain.batch_size = 16;
  plain.seed = 9;
  plain.m = 1;
  plain.d = 6;
  plain.d_a = 4;

  TrainConfig svgd = plain;
  svgd.sampler.rule = UpdateRule::svgd;

  TrainResult a = train(plain, splits);
  TrainResult b = train(svgd, splits);
  CHECK((flatten_parameters(a.model) - flatten_parameters(b.model)).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (size_t e = 0; e < a.history.epochs.size(); ++e) {
    CHECK(a.history.epochs[e].train_loss == b.history.epochs[e].train_loss);
    CHECK(a.history.epochs[e].val_acc == b.history.epochs[e].val_acc);
  }
}

TEST_CASE("smoothed cosine regularizer is exactly svgd with the cosine kernel") {
  RngState data_rng = RngState::make(108, Stream::test);
  DataSplits splits = marker_splits(data_rng, 20, 3, 48, 16);

  TrainConfig reg_cfg;
  reg_cfg.sampler.rule = UpdateRule::plain;
  reg_cfg.sampler.stepsize = 0.05;
  reg_cfg.reg.kind = RegKind::cosine_param;
  reg_cfg.reg.variant = CosineVariant::swap_ij_smooth;
  reg_cfg.reg.lambda = 0.1;
  reg_cfg.epochs = 4;
  reg_cfg.batch_size = 12;
  reg_cfg.seed = 11;
  reg_cfg.d = 6;
  reg_cfg.d_a = 5;
  reg_cfg.m = 4;

  TrainConfig svgd_cfg = reg_cfg;
  svgd_cfg.reg = RegConfig{};
  svgd_cfg.sampler.rule = UpdateRule::svgd;
  svgd_cfg.sampler.kernel.kind = KernelKind::cosine;
  svgd_cfg.sampler.repulsive_weight = 0.1;

  TrainResult a = train(reg_cfg, splits);
  TrainResult b = train(svgd_cfg, splits);
  CHECK((flatten_parameters(a.model) - flatten_parameters(b.model)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("smoothed cosine variant demands the plain rule") {
  RngState r = RngState::make(109, Stream::test);
  SentenceClassifier model = random_model(r, 12, 4, 3, 3, 3);
  std::vector<Example> batch = random_batch(r, 12, 3, 2);

  TrainConfig config;
  config.sampler.rule = UpdateRule::svgd;
  config.reg.kind = RegKind::cosine_param;
  config.reg.variant = CosineVariant::swap_ij_smooth;
  config.m = 3;
  TrainState state = make_train_state(model, config);
  CHECK_THROWS_AS(train_step(model, batch, config, state), std::invalid_argument);
}

TEST_CASE("a masked head's particle survives a train_step bit for bit") {
  RngState r = RngState::make(110, Stream::test);
  for (UpdateRule rule : {UpdateRule::plain, UpdateRule::svgd, UpdateRule::spos,
                          UpdateRule::sgld}) {
    SentenceClassifier model = random_model(r, 15, 4, 3, 4, 3);
    model = mask_head(model, 2);
    std::vector<Example> batch = random_batch(r, 15, 3, 4);

    TrainConfig config;
    config.sampler.rule = rule;
    config.sampler.stepsize = 0.1;
    config.sampler.beta_inv = 0.01;
    config.m = 4;
    TrainState state = make_train_state(model, config);

    const Vector masked_before = model.attn.v.col(2);
    const Vector other_before = model.attn.v.col(0);
    train_step(model, batch, config, state);
    CHECK((Vector(model.attn.v.col(2)) - masked_before).cwiseAbs().maxCoeff() == 0.0);
    CHECK((Vector(model.attn.v.col(0)) - other_before).cwiseAbs().maxCoeff() > 0.0);
  }
}

TEST_CASE("head with zeroed readout receives no plain-rule update") {
  RngState r = RngState::make(111, Stream::test);
  SentenceClassifier model = random_model(r, 15, 4, 3, 3, 3);
  // Cut head 1's contribution to the logits.
  model.out_w.middleRows(1 * model.d(), model.d()).setZero();
  std::vector<Example> batch = random_batch(r, 15, 3, 4);

  TrainConfig config;
  config.sampler.rule = UpdateRule::plain;
  config.sampler.stepsize = 0.1;
  config.m = 3;
  TrainState state = make_train_state(model, config);

  const Vector head1_before = model.attn.v.col(1);
  train_step(model, batch, config, state);
  CHECK((Vector(model.attn.v.col(1)) - head1_before).cwiseAbs().maxCoeff() == 0.0);
  // Other heads do move.
  CHECK((extract_particles(model).row(0).transpose() - Vector::Zero(3)).norm() > 0.0);
}

TEST_CASE("64-example memorization: loss under 0.05 within 500 steps") {
  // Each example carries a unique marker token, so the model only has to
  // wire marker embeddings to labels.
  RngState r = RngState::make(112, Stream::test);
  std::vector<Example> batch;
  for (int i = 0; i < 64; ++i) {
    Example ex;
    ex.tokens = {i, 64 + static_cast<int>(r.next_below(6))};
    ex.label = static_cast<int>(r.next_below(4));
    batch.push_back(ex);
  }

  for (UpdateRule rule : {UpdateRule::plain, UpdateRule::svgd}) {
    TrainConfig config;
    config.sampler.rule = rule;
    config.sampler.stepsize = 0.1;
    config.omega.lr = 0.01;
    config.m = 4;
    config.d = 16;
    config.d_a = 8;
    config.seed = 3;

    RngState init = RngState::make(config.seed, Stream::init);
    SentenceClassifier model = SentenceClassifier::make(70, 16, 8, 4, 4, init);
    TrainState state = make_train_state(model, config);
    double loss = 1e9;
    for (int step = 0; step < 500 && loss >= 0.05; ++step) {
      loss = train_step(model, batch, config, state);
    }
    CAPTURE(static_cast<int>(rule));
    CHECK(loss < 0.05);
  }
}

TEST_CASE("train is deterministic given config and seed") {
  RngState data_rng = RngState::make(113, Stream::test);
  DataSplits splits = marker_splits(data_rng, 24, 4, 80, 24);

  TrainConfig config;
  config.sampler.rule = UpdateRule::svgd;
  config.sampler.stepsize = 0.1;
  config.epochs = 3;
  config.batch_size = 16;
  config.seed = 21;
  config.d = 8;
  config.d_a = 6;
  config.m = 4;

  TrainResult a = train(config, splits);
  TrainResult b = train(config, splits);
  REQUIRE(a.history.epochs.size() == b.history.epochs.size());
  for (size_t e = 0; e < a.history.epochs.size(); ++e) {
    CHECK(a.history.epochs[e].train_loss == b.history.epochs[e].train_loss);
    CHECK(a.history.epochs[e].val_acc == b.history.epochs[e].val_acc);
    CHECK(a.history.epochs[e].dist == b.history.epochs[e].dist);
    CHECK(a.history.epochs[e].seconds == 0.0);  // timing off by default
  }
  CHECK((flatten_parameters(a.model) - flatten_parameters(b.model)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.history.best_epoch == b.history.best_epoch);
}

TEST_CASE("train returns the best-validation checkpoint and learns the task") {
  RngState data_rng = RngState::make(114, Stream::test);
  DataSplits splits = marker_splits(data_rng, 24, 4, 120, 40);

  TrainConfig config;
  config.sampler.rule = UpdateRule::svgd;
  config.sampler.stepsize = 0.1;
  config.omega.lr = 0.01;
  config.epochs = 8;
  config.batch_size = 16;
  config.seed = 5;
  config.d = 8;
  config.d_a = 6;
  config.m = 4;

  TrainResult res = train(config, splits);
  REQUIRE(res.history.epochs.size() == 9);  // epoch 0 snapshot + 8 epochs
  double best = 0.0;
  for (const EpochRecord& rec : res.history.epochs) {
    best = std::max(best, rec.val_acc);
    CHECK(std::isfinite(rec.train_loss));
    CHECK(rec.dist >= 0.0);
  }
  CHECK(res.history.best_val_acc == doctest::Approx(best));
  CHECK(accuracy(res.model, splits.val) == doctest::Approx(res.history.best_val_acc));
  // The marker task is learnable: final accuracy clears the untrained
  // snapshot by a wide margin.
  CHECK(res.history.best_val_acc >= res.history.epochs.front().val_acc + 0.2);
}

TEST_CASE("training loss falls for every update rule") {
  RngState data_rng = RngState::make(115, Stream::test);
  DataSplits splits = marker_splits(data_rng, 24, 3, 96, 24);

  for (UpdateRule rule : {UpdateRule::plain, UpdateRule::svgd, UpdateRule::spos,
                          UpdateRule::sgld}) {
    TrainConfig config;
    config.sampler.rule = rule;
    config.sampler.stepsize = rule == UpdateRule::sgld ? 0.02 : 0.1;
    config.sampler.beta_inv = 0.001;
    config.omega.lr = 0.01;
    config.epochs = 5;
    config.batch_size = 16;
    config.seed = 31;
    config.d = 8;
    config.d_a = 6;
    config.m = 4;

    TrainResult res = train(config, splits);
    CAPTURE(static_cast<int>(rule));
    CHECK(res.history.epochs.back().train_loss <
          res.history.epochs.front().train_loss);
  }
}

TEST_CASE("empty datasets and bad batches are rejected") {
  DataSplits splits;
  splits.train.vocab = splits.val.vocab = 10;
  splits.train.classes = splits.val.classes = 2;
  TrainConfig config;
  CHECK_THROWS_AS(train(config, splits), std::invalid_argument);

  RngState r = RngState::make(116, Stream::test);
  SentenceClassifier model = random_model(r, 10, 4, 3, 2, 2);
  TrainState state = make_train_state(model, config);
  CHECK_THROWS_AS(train_step(model, {}, config, state), std::invalid_argument);
  CHECK_THROWS_AS(backward(model, {}, RegConfig{}), std::invalid_argument);
}
