#pragma once

#include "spcnet/types.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace spcnet {

using Edge = std::pair<Index, Index>;

/// Simple undirected graph with node features and class labels.
///
/// Edges are stored once each as (i, j) with i < j, sorted. Duplicate pairs
/// (in either orientation) are dropped on construction; self-loops and
/// out-of-range endpoints are rejected. Immutable after construction.
class Graph {
 public:
  Graph() = default;

  Graph(Index num_nodes, std::vector<Edge> edges, Matrix features, std::vector<int> labels,
        int num_classes)
      : num_nodes_(num_nodes),
        features_(std::move(features)),
        labels_(std::move(labels)),
        num_classes_(num_classes) {
    if (num_nodes_ < 0) throw Error("negative node count");
    for (auto& [a, b] : edges) {
      if (a < 0 || b < 0 || a >= num_nodes_ || b >= num_nodes_) {
        throw Error("edge (" + std::to_string(a) + ", " + std::to_string(b) +
                    ") out of range for " + std::to_string(num_nodes_) + " nodes");
      }
      if (a == b) throw Error("self-loop on node " + std::to_string(a));
      if (a > b) std::swap(a, b);
    }
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    edges_ = std::move(edges);

    if (features_.rows() != num_nodes_) {
      throw Error("feature matrix has " + std::to_string(features_.rows()) + " rows, expected " +
                  std::to_string(num_nodes_));
    }
    if (static_cast<Index>(labels_.size()) != num_nodes_) {
      throw Error("label vector has " + std::to_string(labels_.size()) + " entries, expected " +
                  std::to_string(num_nodes_));
    }
    if (num_classes_ < 1) throw Error("num_classes must be positive");
    for (int y : labels_) {
      if (y < 0 || y >= num_classes_) {
        throw Error("label " + std::to_string(y) + " outside [0, " +
                    std::to_string(num_classes_) + ")");
      }
    }

    degrees_.assign(static_cast<std::size_t>(num_nodes_), 0);
    for (const auto& [a, b] : edges_) {
      ++degrees_[static_cast<std::size_t>(a)];
      ++degrees_[static_cast<std::size_t>(b)];
    }
  }

  Index num_nodes() const { return num_nodes_; }
  Index num_edges() const { return static_cast<Index>(edges_.size()); }
  Index feature_dim() const { return features_.cols(); }
  int num_classes() const { return num_classes_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& features() const { return features_; }
  const std::vector<int>& labels() const { return labels_; }
  Index degree(Index i) const { return degrees_[static_cast<std::size_t>(i)]; }

  bool has_edge(Index a, Index b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{a, b});
  }

  /// Same nodes, features and labels over a different edge set.
  Graph with_edges(std::vector<Edge> edges) const {
    return Graph(num_nodes_, std::move(edges), features_, labels_, num_classes_);
  }

 private:
  Index num_nodes_ = 0;
  std::vector<Edge> edges_;
  Matrix features_;
  std::vector<int> labels_;
  int num_classes_ = 1;
  std::vector<Index> degrees_;
};

/// Symmetric sparse matrix in compressed row storage.
class SparseSymMatrix {
 public:
  struct Triplet {
    Index row;
    Index col;
    Real value;
  };

  SparseSymMatrix() = default;

  /// Builds from triplets. Repeated (row, col) entries are summed. Throws if
  /// the result is not symmetric within 1e-12.
  SparseSymMatrix(Index dim, std::vector<Triplet> triplets) : dim_(dim) {
    std::sort(triplets.begin(), triplets.end(), [](const Triplet& x, const Triplet& y) {
      return x.row != y.row ? x.row < y.row : x.col < y.col;
    });
    offsets_.assign(static_cast<std::size_t>(dim_) + 1, 0);
    Index prev_row = -1;
    Index prev_col = -1;
    for (const auto& t : triplets) {
      if (t.row < 0 || t.col < 0 || t.row >= dim_ || t.col >= dim_) {
        throw Error("sparse entry out of range");
      }
      if (t.row == prev_row && t.col == prev_col) {
        values_.back() += t.value;
        continue;
      }
      cols_.push_back(t.col);
      values_.push_back(t.value);
      ++offsets_[static_cast<std::size_t>(t.row) + 1];
      prev_row = t.row;
      prev_col = t.col;
    }
    for (std::size_t i = 1; i < offsets_.size(); ++i) offsets_[i] += offsets_[i - 1];

    for (Index i = 0; i < dim_; ++i) {
      for (Index p = row_begin(i); p < row_end(i); ++p) {
        if (std::abs(value(cols_[p], i) - values_[p]) > 1e-12) {
          throw Error("matrix is not symmetric at (" + std::to_string(i) + ", " +
                      std::to_string(cols_[p]) + ")");
        }
      }
    }
  }

  Index dim() const { return dim_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }
  Index row_begin(Index i) const { return offsets_[static_cast<std::size_t>(i)]; }
  Index row_end(Index i) const { return offsets_[static_cast<std::size_t>(i) + 1]; }
  const std::vector<Index>& col_indices() const { return cols_; }
  const std::vector<Real>& values() const { return values_; }

  Real value(Index i, Index j) const {
    auto first = cols_.begin() + row_begin(i);
    auto last = cols_.begin() + row_end(i);
    auto it = std::lower_bound(first, last, j);
    if (it == last || *it != j) return 0.0;
    return values_[static_cast<std::size_t>(it - cols_.begin())];
  }

  Matrix to_dense() const {
    Matrix d = Matrix::Zero(dim_, dim_);
    for (Index i = 0; i < dim_; ++i) {
      for (Index p = row_begin(i); p < row_end(i); ++p) d(i, cols_[p]) = values_[p];
    }
    return d;
  }

 private:
  Index dim_ = 0;
  std::vector<Index> offsets_;
  std::vector<Index> cols_;
  std::vector<Real> values_;
};

namespace detail {

inline SparseSymMatrix build_normalized(const Graph& g, bool laplacian) {
  const Index m = g.num_nodes();
  std::vector<Real> inv_sqrt(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) {
    inv_sqrt[static_cast<std::size_t>(i)] = 1.0 / std::sqrt(static_cast<Real>(g.degree(i) + 1));
  }
  const Real sign = laplacian ? -1.0 : 1.0;
  std::vector<SparseSymMatrix::Triplet> trips;
  trips.reserve(static_cast<std::size_t>(m + 2 * g.num_edges()));
  for (Index i = 0; i < m; ++i) {
    const Real self = 1.0 / static_cast<Real>(g.degree(i) + 1);
    trips.push_back({i, i, laplacian ? 1.0 - self : self});
  }
  for (const auto& [a, b] : g.edges()) {
    const Real w = sign * inv_sqrt[static_cast<std::size_t>(a)] * inv_sqrt[static_cast<std::size_t>(b)];
    trips.push_back({a, b, w});
    trips.push_back({b, a, w});
  }
  return SparseSymMatrix(m, std::move(trips));
}

}  // namespace detail

/// Ã = (D+I)^{-1/2} (A+I) (D+I)^{-1/2}.
inline SparseSymMatrix build_normalized_adjacency(const Graph& g) {
  return detail::build_normalized(g, false);
}

/// L̃ = I - Ã. Spectrum lies in [0, 2).
inline SparseSymMatrix build_normalized_laplacian(const Graph& g) {
  return detail::build_normalized(g, true);
}

/// Fraction of edges whose endpoints share a label.
inline Real edge_homophily(const Graph& g) {
  if (g.num_edges() == 0) throw Error("no edges");
  const auto& y = g.labels();
  Index same = 0;
  for (const auto& [a, b] : g.edges()) {
    if (y[static_cast<std::size_t>(a)] == y[static_cast<std::size_t>(b)]) ++same;
  }
  return static_cast<Real>(same) / static_cast<Real>(g.num_edges());
}

/// Sparse-dense product M·B. Rows are accumulated in ascending column order,
/// so results are bit-reproducible for a given build.
inline Matrix spmm(const SparseSymMatrix& m, const Matrix& b) {
  if (b.rows() != m.dim()) {
    throw Error("spmm dimension mismatch: operator is " + std::to_string(m.dim()) +
                "x" + std::to_string(m.dim()) + ", block has " + std::to_string(b.rows()) +
                " rows");
  }
  const Index c = b.cols();
  Matrix out = Matrix::Zero(b.rows(), c);
  const Index* cols = m.col_indices().data();
  const Real* vals = m.values().data();
  const Real* src = b.data();
  Real* dst = out.data();
  for (Index i = 0; i < m.dim(); ++i) {
    Real* row = dst + i * c;
    for (Index p = m.row_begin(i); p < m.row_end(i); ++p) {
      const Real v = vals[p];
      const Real* in = src + cols[p] * c;
      for (Index j = 0; j < c; ++j) row[j] += v * in[j];
    }
  }
  return out;
}

}  // namespace spcnet
