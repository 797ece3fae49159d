#pragma once

#include "spcnet/filter.hpp"
#include "spcnet/graph.hpp"
#include "spcnet/types.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <functional>
#include <random>

namespace spcnet {

/// Largest dense size for which spectral norms are computed exactly.
inline constexpr Index kDenseNormLimit = 2000;

/// Spectral norm of a symmetric matrix: max |eigenvalue|.
inline Real spectral_norm_symmetric(const Matrix& m) {
  if (m.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error("eigenvalue solver failed");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

struct PowerIterationResult {
  Real norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using LinearOperator = std::function<Vector(const Vector&)>;

/// Power iteration on MᵀM. `apply` computes M·v and `apply_t` computes Mᵀ·v.
/// Stops when the relative change of the estimate drops below `tol`.
inline PowerIterationResult spectral_norm_power(const LinearOperator& apply,
                                                const LinearOperator& apply_t, Index dim,
                                                Real tol = 1e-8, int max_iter = 10000,
                                                std::uint64_t seed = 0) {
  PowerIterationResult r;
  if (dim == 0) {
    r.converged = true;
    return r;
  }
  std::mt19937_64 gen(seed);
  std::normal_distribution<Real> normal(0.0, 1.0);
  Vector v(dim);
  for (Index i = 0; i < dim; ++i) v[i] = normal(gen);
  v.normalize();

  Real sigma_sq = 0.0;
  for (r.iterations = 1; r.iterations <= max_iter; ++r.iterations) {
    Vector w = apply_t(apply(v));
    const Real next = w.norm();
    if (next == 0.0) {
      r.norm = 0.0;
      r.converged = true;
      return r;
    }
    v = w / next;
    if (std::abs(next - sigma_sq) <= tol * next) {
      sigma_sq = next;
      r.converged = true;
      break;
    }
    sigma_sq = next;
  }
  r.norm = std::sqrt(sigma_sq);
  return r;
}

inline Vector spmv(const SparseSymMatrix& m, const Vector& v) {
  Matrix block = Eigen::Map<const Matrix>(v.data(), v.size(), 1);
  Matrix out = spmm(m, block);
  return Eigen::Map<const Vector>(out.data(), out.rows());
}

/// ‖Lp - L‖₂, dense for small operators, power iteration otherwise.
inline Real operator_distance(const SparseSymMatrix& l, const SparseSymMatrix& lp) {
  if (l.dim() != lp.dim()) throw Error("operator dimension mismatch");
  if (l.dim() <= kDenseNormLimit) return spectral_norm_symmetric(lp.to_dense() - l.to_dense());
  LinearOperator op = [&](const Vector& v) -> Vector { return spmv(lp, v) - spmv(l, v); };
  return spectral_norm_power(op, op, l.dim()).norm;
}

/// Spectral radius ρ(L), dense or by power iteration.
inline Real spectral_radius(const SparseSymMatrix& l) {
  if (l.dim() <= kDenseNormLimit) return spectral_norm_symmetric(l.to_dense());
  LinearOperator op = [&](const Vector& v) -> Vector { return spmv(l, v); };
  return spectral_norm_power(op, op, l.dim()).norm;
}

/// ‖h(Lp) - h(L)‖₂ for the filter without identity mapping (the identity
/// cancels in the difference).
inline Real filter_change_norm(const SparseSymMatrix& l, const SparseSymMatrix& lp,
                               const FilterSpec& spec) {
  if (l.dim() != lp.dim()) throw Error("operator dimension mismatch");
  const FilterSpec h = spec.without_identity();
  if (l.dim() <= kDenseNormLimit) {
    return spectral_norm_symmetric(filter_operator(lp, h) - filter_operator(l, h));
  }
  LinearOperator op = [&](const Vector& v) -> Vector {
    Matrix block = Eigen::Map<const Matrix>(v.data(), v.size(), 1);
    Matrix d = apply_filter(lp, block, h) - apply_filter(l, block, h);
    return Eigen::Map<const Vector>(d.data(), d.rows());
  };
  return spectral_norm_power(op, op, l.dim()).norm;
}

}  // namespace spcnet
