#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the sparse propagation or the coefficient recurrence.

#include "spcnet/graph.hpp"
#include "spcnet/random.hpp"
#include "spcnet/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <vector>

namespace spcnet::oracle {

/// (D+I)^{-1/2}(A+I)(D+I)^{-1/2} built densely from the edge list.
inline Matrix dense_normalized_adjacency(const Graph& g) {
  const Index m = g.num_nodes();
  Matrix a = Matrix::Identity(m, m);
  for (const auto& [i, j] : g.edges()) {
    a(i, j) = 1.0;
    a(j, i) = 1.0;
  }
  Vector d = a.rowwise().sum();
  Matrix s = d.cwiseSqrt().cwiseInverse().asDiagonal();
  return s * a * s;
}

inline Matrix dense_normalized_laplacian(const Graph& g) {
  return Matrix::Identity(g.num_nodes(), g.num_nodes()) - dense_normalized_adjacency(g);
}

/// C_n(γ, t) = Σ_{j=0}^{n} binom(n, j) (-t)^j γ(γ-1)⋯(γ-n+j+1), in long double.
inline long double pc_explicit(long double gamma, long double t, int n) {
  long double sum = 0.0L;
  long double binom = 1.0L;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) binom = binom * (n - j + 1) / j;
    long double falling = 1.0L;
    for (int r = 0; r < n - j; ++r) falling *= (gamma - r);
    sum += binom * std::pow(-t, static_cast<long double>(j)) * falling;
  }
  return sum;
}

/// Symmetric eigendecomposition of a dense matrix.
struct Eig {
  Vector values;
  Matrix vectors;
};

inline Eig eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return {es.eigenvalues(), es.eigenvectors()};
}

/// U diag(response(λ_i)) Uᵀ B.
inline Matrix spectral_apply(const Matrix& l_dense, const Matrix& b, const std::function<Real(Real)>& response) {
  const Eig e = eig(l_dense);
  Vector r(e.values.size());
  for (Index i = 0; i < r.size(); ++i) r[i] = response(e.values[i]);
  return e.vectors * r.asDiagonal() * e.vectors.transpose() * b;
}

/// Truncated series response computed term by term with explicit factorials.
inline Real series_response(const std::vector<long double>& coeffs, Real lambda) {
  long double sum = 0.0L;
  long double fact = 1.0L;
  for (std::size_t n = 0; n < coeffs.size(); ++n) {
    if (n > 0) fact *= static_cast<long double>(n);
    sum += coeffs[n] * std::pow(static_cast<long double>(-lambda), static_cast<long double>(n)) / fact;
  }
  return static_cast<Real>(sum);
}

inline std::vector<long double> pc_explicit_table(Real k, Real t, int n) {
  std::vector<long double> c;
  for (int i = 0; i <= n; ++i) c.push_back(pc_explicit(k, t, i));
  return c;
}

/// Spectral norm of a general dense matrix via SVD.
inline Real spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Erdős–Rényi graph with random features and labels.
inline Graph random_graph(Index m, Real p, Rng& gen, Index d = 3, int classes = 2) {
  std::vector<Edge> edges;
  for (Index i = 0; i < m; ++i) {
    for (Index j = i + 1; j < m; ++j) {
      if (uniform01(gen) < p) edges.emplace_back(i, j);
    }
  }
  std::normal_distribution<Real> normal(0.0, 1.0);
  Matrix x(m, d);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  std::vector<int> labels(static_cast<std::size_t>(m));
  std::uniform_int_distribution<int> lab(0, classes - 1);
  for (auto& y : labels) y = lab(gen);
  return Graph(m, std::move(edges), std::move(x), std::move(labels), classes);
}

inline Matrix random_matrix(Index rows, Index cols, Rng& gen) {
  std::normal_distribution<Real> normal(0.0, 1.0);
  Matrix x(rows, cols);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(gen);
  return x;
}

inline Real central_difference(const std::function<Real(Real)>& f, Real x, Real h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline Real rel_err(Real a, Real b, Real floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace spcnet::oracle
