#pragma once

#include "spcnet/data.hpp"
#include "spcnet/filter.hpp"
#include "spcnet/graph.hpp"
#include "spcnet/random.hpp"
#include "spcnet/types.hpp"

#include <chrono>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace spcnet {

enum class ModelVariant { SpcnetD, SpcnetL, Pcnet };

inline const char* to_string(ModelVariant v) {
  switch (v) {
    case ModelVariant::SpcnetD: return "SPCNET_D";
    case ModelVariant::SpcnetL: return "SPCNET_L";
    case ModelVariant::Pcnet: return "PCNET";
  }
  return "?";
}

inline ModelVariant model_variant_from_string(const std::string& s) {
  for (auto v : {ModelVariant::SpcnetD, ModelVariant::SpcnetL, ModelVariant::Pcnet}) {
    if (s == to_string(v)) return v;
  }
  throw Error("unknown model variant: " + s);
}

/// Training and architecture hyperparameters.
///
/// hidden == 0 replaces the two-layer perceptron by a single linear layer.
struct Hyper {
  ModelVariant variant = ModelVariant::SpcnetD;
  int hidden = 64;
  Real dropout = 0.5;
  Real lr = 0.01;
  Real weight_decay = 5e-4;
  int epochs = 1000;
  int patience = 200;
  Real k = 1.0;  // fixed order (SPCNET_D) or initial order (SPCNET_L)
  Real t = 0.5;
  int n = 10;
  int big_k = 10;  // PCNET term count
  bool learn_beta = true;
  std::optional<std::vector<Real>> beta_init;  // PCNET; default all 1/(K+1)
  bool include_identity = true;

  void validate() const {
    if (hidden < 0) throw Error("hidden width must be non-negative");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
    if (!(lr > 0.0)) throw Error("learning rate must be positive");
    if (weight_decay < 0.0) throw Error("weight decay must be non-negative");
    if (epochs < 1) throw Error("epochs must be positive");
    if (patience < 0) throw Error("patience must be non-negative");
    if (n < 0) throw Error("truncation N must be non-negative");
    if (!(t >= 0.0)) throw Error("t must be non-negative");
    if (variant == ModelVariant::Pcnet) {
      if (big_k < 1) throw Error("PCNET requires K >= 1");
      if (beta_init && static_cast<int>(beta_init->size()) != big_k + 1) {
        throw Error("PCNET beta_init must have K+1 entries");
      }
    }
  }
};

/// Learnable state. With hidden == 0, W1/b1 are empty and W2 maps d -> C.
/// `k` is present only for SPCNET_L and `beta` only for PCNET.
struct ModelParams {
  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
  std::optional<Real> k;
  std::optional<std::vector<Real>> beta;
  Hyper hyper;

  bool has_hidden() const { return hyper.hidden > 0; }

  FilterSpec filter_spec() const {
    if (hyper.variant == ModelVariant::Pcnet) {
      return FilterSpec::pcnet(*beta, hyper.t, hyper.n, hyper.include_identity);
    }
    const Real order = hyper.variant == ModelVariant::SpcnetL ? *k : hyper.k;
    return FilterSpec::spcnet(order, hyper.t, hyper.n, hyper.include_identity);
  }

  /// Same shapes, all zero.
  ModelParams zeros_like() const {
    ModelParams z = *this;
    z.w1.setZero();
    z.b1.setZero();
    z.w2.setZero();
    z.b2.setZero();
    if (z.k) z.k = 0.0;
    if (z.beta) std::fill(z.beta->begin(), z.beta->end(), 0.0);
    return z;
  }
};

/// A graph together with its normalized Laplacian.
struct GraphContext {
  const Graph* graph;
  SparseSymMatrix laplacian;

  explicit GraphContext(const Graph& g) : graph(&g), laplacian(build_normalized_laplacian(g)) {}
};

/// Uniform(-1/√fan_in, 1/√fan_in) for weights and biases.
inline ModelParams init_params(Index in_dim, int num_classes, const Hyper& hyper, std::uint64_t seed) {
  hyper.validate();
  Rng gen = make_rng(seed, Stream::Init);
  auto fill = [&gen](auto& m, Index fan_in) {
    const Real bound = 1.0 / std::sqrt(static_cast<Real>(std::max<Index>(fan_in, 1)));
    std::uniform_real_distribution<Real> u(-bound, bound);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = u(gen);
  };
  ModelParams p;
  p.hyper = hyper;
  if (hyper.hidden > 0) {
    p.w1.resize(in_dim, hyper.hidden);
    p.b1.resize(hyper.hidden);
    p.w2.resize(hyper.hidden, num_classes);
    fill(p.w1, in_dim);
    fill(p.b1, in_dim);
    fill(p.w2, hyper.hidden);
    p.b2.resize(num_classes);
    fill(p.b2, hyper.hidden);
  } else {
    p.w2.resize(in_dim, num_classes);
    fill(p.w2, in_dim);
    p.b2.resize(num_classes);
    fill(p.b2, in_dim);
  }
  if (hyper.variant == ModelVariant::SpcnetL) p.k = hyper.k;
  if (hyper.variant == ModelVariant::Pcnet) {
    p.beta = hyper.beta_init.value_or(
        std::vector<Real>(static_cast<std::size_t>(hyper.big_k) + 1, 1.0 / (hyper.big_k + 1)));
  }
  return p;
}

/// Intermediates kept by forward() for the backward pass.
struct ForwardCache {
  Matrix x_in;      // input after dropout
  Matrix h_pre;     // x_in W1 + b1
  Matrix h_in;      // ReLU(h_pre) after dropout
  Matrix theta;     // Θ(X)
  Matrix mask1;     // dropout scale per entry (empty when inactive)
  Matrix mask2;
};

struct ForwardResult {
  Matrix logits;
  ForwardCache cache;
};

namespace detail {

inline Matrix dropout(const Matrix& x, Real rate, Rng& gen, Matrix& mask) {
  const Real keep = 1.0 - rate;
  mask.resize(x.rows(), x.cols());
  for (Index i = 0; i < mask.size(); ++i) mask.data()[i] = uniform01(gen) < keep ? 1.0 / keep : 0.0;
  return x.cwiseProduct(mask);
}

inline void add_bias(Matrix& m, const Vector& b) { m.rowwise() += b.transpose(); }

}  // namespace detail

/// Logits (pre-softmax) = filter(Θ(X)) where
/// Θ(X) = ReLU(dropout(X) W1 + b1) → dropout → W2 + b2.
/// Dropout is active only when `train_mode` is set and `rng` is supplied.
inline ForwardResult forward(const GraphContext& ctx, const ModelParams& params, bool train_mode,
                             Rng* rng = nullptr) {
  const Graph& g = *ctx.graph;
  const Hyper& hp = params.hyper;
  const bool drop = train_mode && rng != nullptr && hp.dropout > 0.0;
  ForwardResult r;
  auto& c = r.cache;
  c.x_in = drop ? detail::dropout(g.features(), hp.dropout, *rng, c.mask1) : g.features();
  if (params.has_hidden()) {
    if (params.w1.rows() != g.feature_dim()) throw Error("W1 rows do not match feature dimension");
    c.h_pre.noalias() = c.x_in * params.w1;
    detail::add_bias(c.h_pre, params.b1);
    Matrix h = c.h_pre.cwiseMax(0.0);
    c.h_in = drop ? detail::dropout(h, hp.dropout, *rng, c.mask2) : std::move(h);
    c.theta.noalias() = c.h_in * params.w2;
  } else {
    if (params.w2.rows() != g.feature_dim()) throw Error("W2 rows do not match feature dimension");
    c.theta.noalias() = c.x_in * params.w2;
  }
  detail::add_bias(c.theta, params.b2);
  if (!all_finite(c.theta)) throw Error("numerical divergence");
  r.logits = apply_filter(ctx.laplacian, c.theta, params.filter_spec());
  if (!all_finite(r.logits)) throw Error("numerical divergence");
  return r;
}

struct LossResult {
  Real cross_entropy = 0.0;  // mean over train_idx
  Real objective = 0.0;      // cross_entropy + ½·wd·(‖W1‖² + ‖W2‖²)
  ModelParams grads;         // ∂objective/∂params
};

/// Mean softmax cross-entropy of `logits` over `idx`, and its gradient with
/// respect to the logits (zero outside idx).
inline Real softmax_cross_entropy(const Matrix& logits, const std::vector<int>& labels,
                                  const std::vector<Index>& idx, Matrix* dlogits) {
  if (idx.empty()) throw Error("empty train_idx");
  if (dlogits) *dlogits = Matrix::Zero(logits.rows(), logits.cols());
  const Real inv_n = 1.0 / static_cast<Real>(idx.size());
  Real loss = 0.0;
  for (Index i : idx) {
    const auto row = logits.row(i);
    const Real mx = row.maxCoeff();
    const Real lse = mx + std::log((row.array() - mx).exp().sum());
    const int y = labels[static_cast<std::size_t>(i)];
    loss -= row(y) - lse;
    if (dlogits) {
      dlogits->row(i) = (row.array() - lse).exp() * inv_n;
      (*dlogits)(i, y) -= inv_n;
    }
  }
  return loss * inv_n;
}

/// Objective and gradients with respect to every learnable parameter. The
/// dropout pattern is drawn from `rng` when given; pass nullptr for a
/// deterministic evaluation.
inline LossResult loss_and_grads(const GraphContext& ctx, const ModelParams& params,
                                 const SplitSpec& split, Rng* rng = nullptr) {
  if (split.train_idx.empty()) throw Error("empty train_idx");
  const Hyper& hp = params.hyper;
  const ForwardResult fw = forward(ctx, params, rng != nullptr, rng);
  const auto& c = fw.cache;

  LossResult out;
  Matrix dlogits;
  out.cross_entropy = softmax_cross_entropy(fw.logits, ctx.graph->labels(), split.train_idx, &dlogits);
  const Real penalty = 0.5 * hp.weight_decay * (params.w1.squaredNorm() + params.w2.squaredNorm());
  out.objective = out.cross_entropy + penalty;

  const FilterSpec spec = params.filter_spec();
  ModelParams& g = out.grads;
  g = params.zeros_like();

  const Matrix dtheta = apply_filter_transpose_grad(ctx.laplacian, dlogits, spec);
  if (params.k) g.k = frobenius_dot(dlogits, filter_grad_k(ctx.laplacian, c.theta, spec));
  if (params.beta) {
    const auto terms = pcnet_terms(ctx.laplacian, c.theta, spec);
    for (std::size_t i = 0; i < terms.size(); ++i) (*g.beta)[i] = frobenius_dot(dlogits, terms[i]);
  }

  g.b2 = dtheta.colwise().sum().transpose();
  if (params.has_hidden()) {
    g.w2.noalias() = c.h_in.transpose() * dtheta;
    Matrix dh = dtheta * params.w2.transpose();
    if (c.mask2.size() > 0) dh = dh.cwiseProduct(c.mask2);
    dh = (c.h_pre.array() > 0.0).select(dh, 0.0);
    g.w1.noalias() = c.x_in.transpose() * dh;
    g.b1 = dh.colwise().sum().transpose();
    g.w1 += hp.weight_decay * params.w1;
  } else {
    g.w2.noalias() = c.x_in.transpose() * dtheta;
  }
  g.w2 += hp.weight_decay * params.w2;
  return out;
}

/// Argmax accuracy over idx; ties go to the lowest class index.
inline Real accuracy_from_logits(const Matrix& logits, const std::vector<int>& labels,
                                 const std::vector<Index>& idx) {
  if (idx.empty()) throw Error("empty index set");
  Index correct = 0;
  for (Index i : idx) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) best = c;
    }
    if (best == labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<Real>(correct) / static_cast<Real>(idx.size());
}

inline Real evaluate(const GraphContext& ctx, const ModelParams& params, const std::vector<Index>& idx) {
  if (idx.empty()) throw Error("empty index set");
  return accuracy_from_logits(forward(ctx, params, false).logits, ctx.graph->labels(), idx);
}

// ---------------------------------------------------------------------------
// Parameter packing and the optimizer
// ---------------------------------------------------------------------------

/// Flattens the trainable parameters. Frozen β (learn_beta = false) is
/// excluded.
inline Vector pack(const ModelParams& p) {
  const bool beta = p.beta && p.hyper.learn_beta;
  const Index n = p.w1.size() + p.b1.size() + p.w2.size() + p.b2.size() + (p.k ? 1 : 0) +
                  (beta ? static_cast<Index>(p.beta->size()) : 0);
  Vector v(n);
  Index o = 0;
  auto put = [&](const Real* d, Index len) {
    std::copy(d, d + len, v.data() + o);
    o += len;
  };
  put(p.w1.data(), p.w1.size());
  put(p.b1.data(), p.b1.size());
  put(p.w2.data(), p.w2.size());
  put(p.b2.data(), p.b2.size());
  if (p.k) put(&*p.k, 1);
  if (beta) put(p.beta->data(), static_cast<Index>(p.beta->size()));
  return v;
}

inline void unpack(const Vector& v, ModelParams& p) {
  const bool beta = p.beta && p.hyper.learn_beta;
  Index o = 0;
  auto get = [&](Real* d, Index len) {
    std::copy(v.data() + o, v.data() + o + len, d);
    o += len;
  };
  get(p.w1.data(), p.w1.size());
  get(p.b1.data(), p.b1.size());
  get(p.w2.data(), p.w2.size());
  get(p.b2.data(), p.b2.size());
  if (p.k) get(&*p.k, 1);
  if (beta) get(p.beta->data(), static_cast<Index>(p.beta->size()));
  if (o != v.size()) throw Error("parameter vector size mismatch");
}

/// Adaptive moment estimation over a flat parameter vector.
class Adam {
 public:
  explicit Adam(Index size, Real lr, Real beta1 = 0.9, Real beta2 = 0.999, Real eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(Vector::Zero(size)), v_(Vector::Zero(size)) {}

  void step(Vector& params, const Vector& grad) {
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
    const Real c1 = 1.0 - std::pow(beta1_, t_);
    const Real c2 = 1.0 - std::pow(beta2_, t_);
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
  }

 private:
  Real lr_, beta1_, beta2_, eps_;
  int t_ = 0;
  Vector m_, v_;
};

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct EpochRecord {
  int epoch = 0;
  Real train_loss = 0.0;           // objective before this epoch's update
  std::optional<Real> val_acc;     // after the update; absent without a validation set
  Real seconds = 0.0;
};

struct TrainResult {
  ModelParams best;
  int best_epoch = 0;
  std::vector<EpochRecord> history;
};

/// Full-batch training. Epoch e performs one optimizer step and then scores
/// the validation set; the parameters of the best-scoring epoch (first on
/// ties) are returned. Training stops once `patience` epochs pass without
/// improvement. Without validation nodes every epoch runs and the final
/// parameters are returned.
inline TrainResult train(const GraphContext& ctx, const SplitSpec& split, const Hyper& hyper,
                         std::uint64_t seed) {
  hyper.validate();
  const Graph& g = *ctx.graph;
  ModelParams params = init_params(g.feature_dim(), g.num_classes(), hyper, seed);
  Rng dropout_rng = make_rng(seed, Stream::Dropout);

  Vector flat = pack(params);
  Adam opt(flat.size(), hyper.lr);

  TrainResult res;
  Real best_val = -1.0;
  const bool has_val = !split.val_idx.empty();
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    LossResult lr = loss_and_grads(ctx, params, split, &dropout_rng);
    opt.step(flat, pack(lr.grads));
    unpack(flat, params);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = lr.objective;
    if (has_val) rec.val_acc = evaluate(ctx, params, split.val_idx);
    rec.seconds = std::chrono::duration<Real>(std::chrono::steady_clock::now() - start).count();
    res.history.push_back(rec);

    if (!has_val) {
      res.best = params;
      res.best_epoch = epoch;
      continue;
    }
    if (*rec.val_acc > best_val) {
      best_val = *rec.val_acc;
      res.best = params;
      res.best_epoch = epoch;
    }
    if (epoch - res.best_epoch >= hyper.patience) break;
  }
  return res;
}

}  // namespace spcnet
