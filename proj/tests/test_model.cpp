#include "oracles.hpp"
#include "spcnet/model.hpp"

#include <gtest/gtest.h>

using namespace spcnet;

namespace {

SplitSpec all_train(Index m) {
  SplitSpec s;
  for (Index i = 0; i < m; ++i) s.train_idx.push_back(i);
  return s;
}

Hyper deterministic(ModelVariant v, int hidden = 4) {
  Hyper h;
  h.variant = v;
  h.hidden = hidden;
  h.dropout = 0.0;
  h.k = 1.3;
  h.t = 0.6;
  h.n = 6;
  h.big_k = 3;
  return h;
}

// Central differences of the objective against every analytic gradient entry.
void audit(const GraphContext& ctx, const ModelParams& p, const SplitSpec& split, Real tol) {
  const LossResult lr = loss_and_grads(ctx, p, split);
  ModelParams probe = p;
  probe.hyper.learn_beta = true;
  const Vector flat = pack(probe);
  ModelParams gp = lr.grads;
  gp.hyper.learn_beta = true;
  const Vector analytic = pack(gp);
  ASSERT_EQ(flat.size(), analytic.size());
  for (Index i = 0; i < flat.size(); ++i) {
    auto f = [&](Real v) {
      Vector x = flat;
      x[i] = v;
      ModelParams q = probe;
      unpack(x, q);
      return loss_and_grads(ctx, q, split).objective;
    };
    const Real fd = oracle::central_difference(f, flat[i], 1e-6);
    EXPECT_LE(oracle::rel_err(analytic[i], fd, 1e-6), tol) << "param " << i << " of " << flat.size();
  }
}

}  // namespace

TEST(Forward, ZeroOrderFilterDoublesTheta) {
  Rng gen = make_rng(40, Stream::Probe);
  const Graph g = oracle::random_graph(10, 0.3, gen);
  const GraphContext ctx(g);
  Hyper h = deterministic(ModelVariant::SpcnetD);
  h.k = 0.0;
  h.t = 0.0;
  const ModelParams p = init_params(g.feature_dim(), g.num_classes(), h, 1);
  const auto r = forward(ctx, p, false);
  EXPECT_LT((r.logits - 2.0 * r.cache.theta).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Forward, ZeroParametersGiveUniformLoss) {
  Rng gen = make_rng(41, Stream::Probe);
  const Graph g = oracle::random_graph(10, 0.3, gen, 3, 4);
  const GraphContext ctx(g);
  const ModelParams p = init_params(3, 4, deterministic(ModelVariant::SpcnetD), 1).zeros_like();
  const auto r = forward(ctx, p, false);
  EXPECT_EQ(r.logits.cwiseAbs().maxCoeff(), 0.0);
  const LossResult lr = loss_and_grads(ctx, p, all_train(10));
  EXPECT_NEAR(lr.cross_entropy, std::log(4.0), 1e-14);
}

TEST(Forward, FeatureDimensionMismatchThrows) {
  Rng gen = make_rng(42, Stream::Probe);
  const Graph g = oracle::random_graph(6, 0.3, gen, 3);
  const GraphContext ctx(g);
  const ModelParams p = init_params(4, 2, deterministic(ModelVariant::SpcnetD), 1);
  EXPECT_THROW(forward(ctx, p, false), Error);
}

TEST(Loss, EmptyTrainSetThrows) {
  Rng gen = make_rng(43, Stream::Probe);
  const Graph g = oracle::random_graph(6, 0.3, gen);
  const GraphContext ctx(g);
  const ModelParams p = init_params(3, 2, deterministic(ModelVariant::SpcnetD), 1);
  EXPECT_THROW(loss_and_grads(ctx, p, SplitSpec{}), Error);
}

TEST(Loss, GradientContractPerVariant) {
  Rng gen = make_rng(44, Stream::Probe);
  const Graph g = oracle::random_graph(8, 0.3, gen);
  const GraphContext ctx(g);
  const auto d = loss_and_grads(ctx, init_params(3, 2, deterministic(ModelVariant::SpcnetD), 1), all_train(8));
  EXPECT_FALSE(d.grads.k.has_value());
  EXPECT_FALSE(d.grads.beta.has_value());
  const auto l = loss_and_grads(ctx, init_params(3, 2, deterministic(ModelVariant::SpcnetL), 1), all_train(8));
  EXPECT_TRUE(l.grads.k.has_value());
  const auto p = loss_and_grads(ctx, init_params(3, 2, deterministic(ModelVariant::Pcnet), 1), all_train(8));
  ASSERT_TRUE(p.grads.beta.has_value());
  EXPECT_EQ(p.grads.beta->size(), 4u);
}

TEST(Loss, GradientAudit) {
  Rng gen = make_rng(45, Stream::Probe);
  const ModelVariant variants[] = {ModelVariant::SpcnetD, ModelVariant::SpcnetL, ModelVariant::Pcnet};
  for (int trial = 0; trial < 12; ++trial) {
    const Graph g = oracle::random_graph(8 + trial % 5, 0.35, gen, 3, 3);
    const GraphContext ctx(g);
    Hyper h = deterministic(variants[trial % 3], trial % 4 == 3 ? 0 : 4);
    if (h.variant == ModelVariant::Pcnet) h.beta_init = std::vector<Real>{0.3, 0.2, -0.1, 0.4};
    const ModelParams p = init_params(3, 3, h, static_cast<std::uint64_t>(trial));
    SplitSpec split;
    for (Index i = 0; i < g.num_nodes(); i += 2) split.train_idx.push_back(i);
    audit(ctx, p, split, 1e-4);
  }
}

TEST(Evaluate, AccuracyExamples) {
  Matrix onehot = Matrix::Zero(4, 3);
  const std::vector<int> labels = {2, 0, 1, 2};
  for (Index i = 0; i < 4; ++i) onehot(i, labels[static_cast<std::size_t>(i)]) = 5.0;
  EXPECT_DOUBLE_EQ(accuracy_from_logits(onehot, labels, {0, 1, 2, 3}), 1.0);

  const std::vector<int> half = {0, 0, 0, 0, 0, 1, 1, 1, 1, 1};
  std::vector<Index> idx(10);
  std::iota(idx.begin(), idx.end(), 0);
  EXPECT_DOUBLE_EQ(accuracy_from_logits(Matrix::Zero(10, 2), half, idx), 0.5);

  Rng gen = make_rng(46, Stream::Probe);
  const Matrix logits = oracle::random_matrix(10, 2, gen);
  EXPECT_DOUBLE_EQ(accuracy_from_logits(logits, half, idx), accuracy_from_logits(3.0 * logits, half, idx));
  EXPECT_THROW(accuracy_from_logits(logits, half, {}), Error);
}

TEST(Train, SeparableToyReachesFullTrainAccuracy) {
  // Two 10-node cliques joined by one edge; features point toward the class.
  std::vector<Edge> edges;
  for (Index b = 0; b < 2; ++b) {
    for (Index i = 0; i < 10; ++i) {
      for (Index j = i + 1; j < 10; ++j) edges.emplace_back(10 * b + i, 10 * b + j);
    }
  }
  edges.emplace_back(9, 10);
  Matrix x(20, 2);
  std::vector<int> labels(20);
  for (Index i = 0; i < 20; ++i) {
    labels[static_cast<std::size_t>(i)] = i < 10 ? 0 : 1;
    x(i, 0) = i < 10 ? 1.0 : 0.0;
    x(i, 1) = i < 10 ? 0.0 : 1.0;
  }
  const Graph g(20, edges, x, labels, 2);
  const GraphContext ctx(g);
  SplitSpec split;
  for (Index i = 0; i < 20; i += 2) split.train_idx.push_back(i);
  Hyper h;
  h.epochs = 200;
  const TrainResult tr = train(ctx, split, h, 0);
  EXPECT_EQ(tr.history.size(), 200u);
  EXPECT_DOUBLE_EQ(evaluate(ctx, tr.best, split.train_idx), 1.0);
}

TEST(Train, ZeroPatienceStopsAfterFirstEpoch) {
  Rng gen = make_rng(47, Stream::Probe);
  const Graph g = oracle::random_graph(20, 0.2, gen);
  const GraphContext ctx(g);
  SplitSpec split;
  for (Index i = 0; i < 20; ++i) (i < 10 ? split.train_idx : split.val_idx).push_back(i);
  Hyper h;
  h.patience = 0;
  const TrainResult tr = train(ctx, split, h, 3);
  EXPECT_EQ(tr.history.size(), 1u);
  EXPECT_EQ(tr.best_epoch, 0);

  // Equal to a single manual step from the same initialization.
  Hyper one = h;
  one.epochs = 1;
  one.patience = 200;
  const TrainResult ref = train(ctx, split, one, 3);
  EXPECT_EQ(pack(tr.best), pack(ref.best));
}

TEST(Train, FixedSeedIsBitIdentical) {
  Rng gen = make_rng(48, Stream::Probe);
  const Graph g = oracle::random_graph(30, 0.2, gen);
  const GraphContext ctx(g);
  SplitSpec split;
  for (Index i = 0; i < 30; ++i) (i % 3 == 0 ? split.train_idx : split.val_idx).push_back(i);
  Hyper h;
  h.variant = ModelVariant::SpcnetL;
  h.epochs = 60;
  const TrainResult a = train(ctx, split, h, 9);
  const TrainResult b = train(ctx, split, h, 9);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train_loss, b.history[i].train_loss);
    EXPECT_EQ(a.history[i].val_acc, b.history[i].val_acc);
  }
  EXPECT_EQ(pack(a.best), pack(b.best));
  EXPECT_NE(*a.best.k, 1.0);
}

TEST(Train, FrozenSingleTermPcnetMatchesSpcnet) {
  Rng gen = make_rng(49, Stream::Probe);
  const Graph g = oracle::random_graph(25, 0.2, gen);
  const GraphContext ctx(g);
  SplitSpec split;
  for (Index i = 0; i < 25; ++i) (i % 2 == 0 ? split.train_idx : split.val_idx).push_back(i);
  Hyper d;
  d.k = 1.0;
  d.epochs = 50;
  Hyper p = d;
  p.variant = ModelVariant::Pcnet;
  p.big_k = 1;
  p.beta_init = std::vector<Real>{0.0, 1.0};
  p.learn_beta = false;
  const TrainResult a = train(ctx, split, d, 4);
  const TrainResult b = train(ctx, split, p, 4);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_NEAR(a.history[i].train_loss, b.history[i].train_loss, 1e-10);
  }
  EXPECT_EQ(*b.best.beta, (std::vector<Real>{0.0, 1.0}));
}

TEST(Hyper, ValidationErrors) {
  Hyper h;
  h.dropout = 1.0;
  EXPECT_THROW(h.validate(), Error);
  h = Hyper{};
  h.lr = 0.0;
  EXPECT_THROW(h.validate(), Error);
  h = Hyper{};
  h.variant = ModelVariant::Pcnet;
  h.big_k = 2;
  h.beta_init = std::vector<Real>{1.0};
  EXPECT_THROW(h.validate(), Error);
  EXPECT_THROW(model_variant_from_string("GCN"), Error);
}
