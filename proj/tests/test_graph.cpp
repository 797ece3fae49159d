#include "oracles.hpp"
#include "spcnet/graph.hpp"
#include "spcnet/linalg.hpp"

#include <gtest/gtest.h>

using namespace spcnet;

namespace {

Graph make_graph(Index m, std::vector<Edge> edges, int classes = 2, std::vector<int> labels = {}) {
  if (labels.empty()) labels.assign(static_cast<std::size_t>(m), 0);
  return Graph(m, std::move(edges), Matrix::Ones(m, 1), std::move(labels), classes);
}

}  // namespace

TEST(Graph, NormalizesAndDeduplicatesEdges) {
  const Graph g = make_graph(4, {{1, 0}, {0, 1}, {3, 2}, {1, 2}});
  EXPECT_EQ(g.num_edges(), 3);
  EXPECT_TRUE(g.has_edge(0, 1));
  EXPECT_TRUE(g.has_edge(1, 0));
  EXPECT_TRUE(g.has_edge(2, 3));
  EXPECT_FALSE(g.has_edge(0, 3));
  EXPECT_EQ(g.degree(1), 2);
}

TEST(Graph, RejectsInvalidInput) {
  EXPECT_THROW(make_graph(3, {{1, 1}}), Error);
  EXPECT_THROW(make_graph(3, {{0, 3}}), Error);
  EXPECT_THROW(make_graph(3, {{-1, 0}}), Error);
  EXPECT_THROW(Graph(3, {}, Matrix::Ones(2, 1), {0, 0, 0}, 1), Error);
  EXPECT_THROW(Graph(3, {}, Matrix::Ones(3, 1), {0, 0}, 1), Error);
  EXPECT_THROW(Graph(3, {}, Matrix::Ones(3, 1), {0, 2, 0}, 2), Error);
}

TEST(SparseSymMatrix, MergesDuplicatesAndSortsColumns) {
  const SparseSymMatrix m(3, {{0, 2, 1.0}, {2, 0, 1.0}, {0, 1, 0.5}, {1, 0, 0.5}, {0, 1, 0.25}, {1, 0, 0.25}});
  EXPECT_DOUBLE_EQ(m.value(0, 1), 0.75);
  EXPECT_DOUBLE_EQ(m.value(1, 0), 0.75);
  EXPECT_DOUBLE_EQ(m.value(1, 1), 0.0);
  const auto& cols = m.col_indices();
  for (Index i = 0; i < m.dim(); ++i) {
    for (Index p = m.row_begin(i) + 1; p < m.row_end(i); ++p) EXPECT_LT(cols[p - 1], cols[p]);
  }
}

TEST(SparseSymMatrix, RejectsAsymmetricInput) {
  EXPECT_THROW(SparseSymMatrix(2, {{0, 1, 1.0}}), Error);
  EXPECT_THROW(SparseSymMatrix(2, {{0, 1, 1.0}, {1, 0, 2.0}}), Error);
  EXPECT_THROW(SparseSymMatrix(2, {{0, 2, 1.0}, {2, 0, 1.0}}), Error);
}

TEST(NormalizedAdjacency, TwoNodePath) {
  const Matrix a = build_normalized_adjacency(make_graph(2, {{0, 1}})).to_dense();
  EXPECT_TRUE(a.isApprox(Matrix::Constant(2, 2, 0.5), 1e-15));
}

TEST(NormalizedAdjacency, SingleNode) {
  const Matrix a = build_normalized_adjacency(make_graph(1, {})).to_dense();
  EXPECT_EQ(a.rows(), 1);
  EXPECT_DOUBLE_EQ(a(0, 0), 1.0);
}

TEST(NormalizedAdjacency, Triangle) {
  const Matrix a = build_normalized_adjacency(make_graph(3, {{0, 1}, {1, 2}, {0, 2}})).to_dense();
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 3; ++j) EXPECT_NEAR(a(i, j), 1.0 / 3.0, 1e-15);
  }
}

TEST(NormalizedLaplacian, TwoNodePath) {
  const Matrix l = build_normalized_laplacian(make_graph(2, {{0, 1}})).to_dense();
  Matrix expected(2, 2);
  expected << 0.5, -0.5, -0.5, 0.5;
  EXPECT_TRUE(l.isApprox(expected, 1e-15));
  const auto e = oracle::eig(l);
  EXPECT_NEAR(e.values[0], 0.0, 1e-14);
  EXPECT_NEAR(e.values[1], 1.0, 1e-14);
}

TEST(NormalizedLaplacian, SingleNode) {
  const Matrix l = build_normalized_laplacian(make_graph(1, {})).to_dense();
  EXPECT_DOUBLE_EQ(l(0, 0), 0.0);
}

TEST(NormalizedLaplacian, MatchesDenseOracleAndSpectrum) {
  Rng gen = make_rng(11, Stream::Probe);
  for (int trial = 0; trial < 20; ++trial) {
    const Index m = 2 + trial * 2;
    const Graph g = oracle::random_graph(m, 0.3, gen);
    const Matrix l = build_normalized_laplacian(g).to_dense();
    const Matrix a = build_normalized_adjacency(g).to_dense();
    EXPECT_LT((l - oracle::dense_normalized_laplacian(g)).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((l + a - Matrix::Identity(m, m)).cwiseAbs().maxCoeff(), 1e-15);

    const auto e = oracle::eig(l);
    EXPECT_GE(e.values.minCoeff(), -1e-12);
    EXPECT_LE(e.values.maxCoeff(), 2.0 + 1e-12);
    EXPECT_NEAR(e.values.minCoeff(), 0.0, 1e-12);

    Vector kernel(m);
    for (Index i = 0; i < m; ++i) kernel[i] = std::sqrt(static_cast<Real>(g.degree(i)) + 1.0);
    EXPECT_LT((l * kernel).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(EdgeHomophily, Examples) {
  EXPECT_DOUBLE_EQ(edge_homophily(make_graph(3, {{0, 1}, {1, 2}}, 1)), 1.0);
  const Graph bip = make_graph(4, {{0, 2}, {0, 3}, {1, 2}, {1, 3}}, 2, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(edge_homophily(bip), 0.0);
  const Graph half = make_graph(4, {{0, 1}, {1, 2}}, 2, {0, 0, 1, 1});
  EXPECT_DOUBLE_EQ(edge_homophily(half), 0.5);
  EXPECT_THROW(edge_homophily(make_graph(2, {})), Error);
}

TEST(Spmm, IdentityOperatorLeavesBlockUnchanged) {
  const SparseSymMatrix eye(3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}});
  Rng gen = make_rng(1, Stream::Probe);
  const Matrix b = oracle::random_matrix(3, 4, gen);
  EXPECT_EQ(spmm(eye, b), b);
}

TEST(Spmm, TwoNodePathLaplacian) {
  const SparseSymMatrix l = build_normalized_laplacian(make_graph(2, {{0, 1}}));
  Matrix x(2, 1);
  x << 1.0, 0.0;
  const Matrix y = spmm(l, x);
  EXPECT_DOUBLE_EQ(y(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(y(1, 0), -0.5);
}

TEST(Spmm, MatchesDenseProduct) {
  Rng gen = make_rng(2, Stream::Probe);
  for (int trial = 0; trial < 10; ++trial) {
    const Graph g = oracle::random_graph(10, 0.4, gen);
    const SparseSymMatrix l = build_normalized_laplacian(g);
    const Matrix b = oracle::random_matrix(10, 3, gen);
    EXPECT_LT((spmm(l, b) - l.to_dense() * b).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Spmm, DimensionMismatchThrows) {
  const SparseSymMatrix l = build_normalized_laplacian(make_graph(3, {{0, 1}}));
  EXPECT_THROW(spmm(l, Matrix::Ones(4, 1)), Error);
}

TEST(Linalg, PowerIterationAgreesWithDenseNorm) {
  Rng gen = make_rng(3, Stream::Probe);
  const Graph g = oracle::random_graph(40, 0.2, gen);
  const SparseSymMatrix l = build_normalized_laplacian(g);
  LinearOperator op = [&](const Vector& v) -> Vector { return spmv(l, v); };
  const auto r = spectral_norm_power(op, op, l.dim(), 1e-12, 100000);
  EXPECT_NEAR(r.norm, oracle::spectral_norm(l.to_dense()), 1e-5);
  EXPECT_NEAR(spectral_radius(l), oracle::spectral_norm(l.to_dense()), 1e-12);
}
