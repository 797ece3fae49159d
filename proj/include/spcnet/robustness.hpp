#pragma once

#include "spcnet/data.hpp"
#include "spcnet/filter.hpp"
#include "spcnet/graph.hpp"
#include "spcnet/linalg.hpp"
#include "spcnet/model.hpp"
#include "spcnet/parallel.hpp"
#include "spcnet/random.hpp"
#include "spcnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace spcnet {

enum class PerturbMode { Add, Remove, Mixed };

inline const char* to_string(PerturbMode m) {
  switch (m) {
    case PerturbMode::Add: return "ADD";
    case PerturbMode::Remove: return "REMOVE";
    case PerturbMode::Mixed: return "MIXED";
  }
  return "?";
}

inline PerturbMode perturb_mode_from_string(const std::string& s) {
  for (auto m : {PerturbMode::Add, PerturbMode::Remove, PerturbMode::Mixed}) {
    if (s == to_string(m)) return m;
  }
  throw Error("unknown perturbation mode: " + s);
}

struct PerturbSpec {
  Real ratio = 0.2;  // fraction of |E| changed
  PerturbMode mode = PerturbMode::Mixed;
  std::uint64_t seed = 0;
};

namespace detail {

inline Index ceil_count(Real x) { return static_cast<Index>(std::ceil(x - 1e-9)); }

// `count` distinct pairs i < j absent from g, uniformly at random.
inline std::vector<Edge> sample_absent_pairs(const Graph& g, Index count, Rng& gen) {
  const Index m = g.num_nodes();
  const Index total = m * (m - 1) / 2;
  const Index absent = total - g.num_edges();
  if (count > absent) {
    throw Error("graph too small: cannot add " + std::to_string(count) + " edges, only " +
                std::to_string(absent) + " absent pairs");
  }
  std::vector<Edge> out;
  if (count == 0) return out;
  if (absent <= 4 * count) {
    std::vector<Edge> pool;
    pool.reserve(static_cast<std::size_t>(absent));
    for (Index i = 0; i < m; ++i) {
      for (Index j = i + 1; j < m; ++j) {
        if (!g.has_edge(i, j)) pool.emplace_back(i, j);
      }
    }
    for (Index s = 0; s < count; ++s) {
      std::uniform_int_distribution<Index> pick(s, absent - 1);
      std::swap(pool[static_cast<std::size_t>(s)], pool[static_cast<std::size_t>(pick(gen))]);
    }
    out.assign(pool.begin(), pool.begin() + count);
    return out;
  }
  std::set<Edge> chosen;
  std::uniform_int_distribution<Index> node(0, m - 1);
  while (static_cast<Index>(out.size()) < count) {
    Index a = node(gen), b = node(gen);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (g.has_edge(a, b) || !chosen.insert({a, b}).second) continue;
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace detail

/// Random structural perturbation. MIXED removes ⌈ratio·|E|/2⌉ existing edges
/// and inserts as many pairs that were absent in g; ADD and REMOVE change
/// ⌈ratio·|E|⌉ edges on one side only.
inline Graph perturb(const Graph& g, const PerturbSpec& spec) {
  if (!(spec.ratio >= 0.0 && spec.ratio <= 1.0)) throw Error("perturb ratio must lie in [0, 1]");
  if (spec.ratio == 0.0) return g;
  const Real budget = spec.ratio * static_cast<Real>(g.num_edges());
  if (budget < 1.0 - 1e-9) throw Error("perturb ratio changes fewer than one edge");

  Index n_remove = 0, n_add = 0;
  switch (spec.mode) {
    case PerturbMode::Add: n_add = detail::ceil_count(budget); break;
    case PerturbMode::Remove: n_remove = detail::ceil_count(budget); break;
    case PerturbMode::Mixed: n_remove = n_add = detail::ceil_count(budget / 2.0); break;
  }
  n_remove = std::min(n_remove, g.num_edges());

  Rng gen = make_rng(spec.seed, Stream::Perturb);
  std::vector<Edge> edges = g.edges();
  for (Index s = 0; s < n_remove; ++s) {
    std::uniform_int_distribution<Index> pick(s, static_cast<Index>(edges.size()) - 1);
    std::swap(edges[static_cast<std::size_t>(s)], edges[static_cast<std::size_t>(pick(gen))]);
  }
  edges.erase(edges.begin(), edges.begin() + n_remove);
  const auto added = detail::sample_absent_pairs(g, n_add, gen);
  edges.insert(edges.end(), added.begin(), added.end());
  return g.with_edges(std::move(edges));
}

/// ‖h(L)x - h(Lp)x‖₂ / ‖x‖₂ for the filter without identity mapping.
inline Real relative_output_distance(const SparseSymMatrix& l, const SparseSymMatrix& lp,
                                     const FilterSpec& spec, const Vector& x) {
  const Real nx = x.norm();
  if (nx == 0.0) throw Error("zero input signal");
  const FilterSpec h = spec.without_identity();
  Matrix block = Eigen::Map<const Matrix>(x.data(), x.size(), 1);
  return (apply_filter(l, block, h) - apply_filter(lp, block, h)).norm() / nx;
}

struct StabilityCheck {
  Real bound = 0.0;               // stability_constant · ‖Lp - L‖₂
  Real observed = 0.0;            // ‖h(Lp) - h(L)‖₂
  Real margin = 0.0;              // bound - observed
  Real constant = 0.0;
  Real operator_distance = 0.0;
  Real spectral_radius = 0.0;     // max(ρ(L), ρ(Lp))
  Real radius_aware_bound = 0.0;  // stability_constant(spec, ρ) · ‖Lp - L‖₂
};

inline StabilityCheck stability_check(const SparseSymMatrix& l, const SparseSymMatrix& lp,
                                      const FilterSpec& spec) {
  StabilityCheck s;
  s.operator_distance = operator_distance(l, lp);
  s.observed = filter_change_norm(l, lp, spec);
  s.constant = stability_constant(spec);
  s.bound = s.constant * s.operator_distance;
  s.margin = s.bound - s.observed;
  s.spectral_radius = std::max(spectral_radius(l), spectral_radius(lp));
  s.radius_aware_bound = stability_constant(spec, s.spectral_radius) * s.operator_distance;
  return s;
}

struct RobustnessCell {
  Real ratio = 0.0;
  std::uint64_t seed = 0;
  Real test_acc = 0.0;
  Index num_edges = 0;
};

struct RatioSummary {
  Real ratio = 0.0;
  Summary acc;
};

struct RobustnessReport {
  std::vector<RobustnessCell> cells;  // ratio-major, seeds in the given order
  std::vector<RatioSummary> per_ratio;
};

/// For every (ratio, seed): perturb the graph, split the nodes, train on the
/// perturbed graph and score the test split. The split depends only on the
/// seed, so every ratio is evaluated on the same nodes.
inline RobustnessReport robustness_sweep(const Graph& g, const SplitProtocol& protocol,
                                         const Hyper& hyper, const std::vector<Real>& ratios,
                                         const std::vector<std::uint64_t>& seeds,
                                         PerturbMode mode = PerturbMode::Mixed, int workers = 1) {
  if (ratios.empty() || seeds.empty()) throw Error("robustness sweep needs ratios and seeds");
  RobustnessReport rep;
  rep.cells.resize(ratios.size() * seeds.size());
  parallel_for(rep.cells.size(), workers, [&](std::size_t cell) {
    const Real ratio = ratios[cell / seeds.size()];
    const std::uint64_t seed = seeds[cell % seeds.size()];
    const Graph gp = perturb(g, {ratio, mode, seed});
    SplitProtocol sp = protocol;
    sp.seed = seed;
    const SplitSpec split = make_split(g, sp);
    const GraphContext ctx(gp);
    const TrainResult tr = train(ctx, split, hyper, seed);
    rep.cells[cell] = {ratio, seed, evaluate(ctx, tr.best, split.test_idx), gp.num_edges()};
  });
  for (std::size_t r = 0; r < ratios.size(); ++r) {
    std::vector<Real> accs;
    for (std::size_t s = 0; s < seeds.size(); ++s) accs.push_back(rep.cells[r * seeds.size() + s].test_acc);
    rep.per_ratio.push_back({ratios[r], summarize(accs)});
  }
  return rep;
}

}  // namespace spcnet
