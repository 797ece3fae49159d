#pragma once

#include "spcnet/graph.hpp"
#include "spcnet/pc_poly.hpp"
#include "spcnet/types.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace spcnet {

enum class FilterVariant { Spcnet, Pcnet };

/// Truncated Poisson–Charlier filter description.
///
/// Spcnet:  out = [B] + Σ_{n=0}^{N} C_n(k, t) (-L)^n / n! B
/// Pcnet:   out = [B] + β_0 B + Σ_{κ=1}^{K} β_κ Σ_{n=0}^{N} C_n(κ, t) (-L)^n / n! B
///
/// The bracketed identity term is present when include_identity is set.
struct FilterSpec {
  FilterVariant variant = FilterVariant::Spcnet;
  Real k = 1.0;
  int big_k = 10;  // Pcnet term count K
  Real t = 0.5;
  int n = 10;      // truncation N
  std::vector<Real> beta;
  bool include_identity = true;

  static FilterSpec spcnet(Real k, Real t, int n, bool identity = true) {
    FilterSpec s;
    s.k = k;
    s.t = t;
    s.n = n;
    s.include_identity = identity;
    return s;
  }

  static FilterSpec pcnet(std::vector<Real> beta, Real t, int n, bool identity = true) {
    FilterSpec s;
    s.variant = FilterVariant::Pcnet;
    s.big_k = static_cast<int>(beta.size()) - 1;
    s.beta = std::move(beta);
    s.t = t;
    s.n = n;
    s.include_identity = identity;
    return s;
  }

  FilterSpec without_identity() const {
    FilterSpec s = *this;
    s.include_identity = false;
    return s;
  }

  void validate() const {
    if (n < 0) throw Error("filter truncation N must be non-negative");
    if (!std::isfinite(t) || t < 0.0) throw Error("filter time t must be finite and >= 0");
    if (variant == FilterVariant::Spcnet) {
      if (!std::isfinite(k)) throw Error("filter order k must be finite");
    } else {
      if (big_k < 1) throw Error("PCNET requires K >= 1");
      if (static_cast<int>(beta.size()) != big_k + 1) {
        throw Error("PCNET requires beta of length K+1 = " + std::to_string(big_k + 1) +
                    ", got " + std::to_string(beta.size()));
      }
    }
  }
};

/// Coefficients c_n of the non-identity series Σ c_n (-L)^n / n!. For Pcnet
/// the β_0 term is not included (it multiplies B directly).
inline std::vector<Real> series_coefficients(const FilterSpec& spec) {
  if (spec.variant == FilterVariant::Spcnet) return pc_coefficients(spec.k, spec.t, spec.n).values;
  std::vector<Real> c(static_cast<std::size_t>(spec.n) + 1, 0.0);
  for (int kappa = 1; kappa <= spec.big_k; ++kappa) {
    const auto v = pc_coefficients(static_cast<Real>(kappa), spec.t, spec.n).values;
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += spec.beta[kappa] * v[i];
  }
  return c;
}

namespace detail {

inline void check_filter_inputs(const SparseSymMatrix& l, const Matrix& b, const FilterSpec& spec) {
  spec.validate();
  if (b.rows() != l.dim()) {
    throw Error("filter dimension mismatch: operator has " + std::to_string(l.dim()) +
                " rows, block has " + std::to_string(b.rows()));
  }
  if (!all_finite(b)) throw Error("non-finite values in filter input");
}

// Σ_n coeffs[n] P_n with P_0 = B, P_n = (-1/n) L P_{n-1}.
inline Matrix propagate_sum(const SparseSymMatrix& l, const Matrix& b, const std::vector<Real>& coeffs) {
  Matrix acc = coeffs[0] * b;
  Matrix p = b;
  for (std::size_t i = 1; i < coeffs.size(); ++i) {
    p = spmm(l, p) * (-1.0 / static_cast<Real>(i));
    acc.noalias() += coeffs[i] * p;
  }
  return acc;
}

}  // namespace detail

inline Matrix apply_filter(const SparseSymMatrix& l, const Matrix& b, const FilterSpec& spec) {
  detail::check_filter_inputs(l, b, spec);
  Matrix acc = detail::propagate_sum(l, b, series_coefficients(spec));
  if (spec.variant == FilterVariant::Spcnet) {
    if (spec.include_identity) return b + acc;
    return acc;
  }
  Matrix head = spec.beta[0] * b;
  if (spec.include_identity) head = b + head;
  return head + acc;
}

/// Vector-Jacobian product of apply_filter with respect to B. The filter is a
/// polynomial in the symmetric L, hence self-adjoint.
inline Matrix apply_filter_transpose_grad(const SparseSymMatrix& l, const Matrix& g,
                                          const FilterSpec& spec) {
  return apply_filter(l, g, spec);
}

/// ∂ apply_filter / ∂k = Σ_{n} (∂C_n/∂k) P_n.
inline Matrix filter_grad_k(const SparseSymMatrix& l, const Matrix& b, const FilterSpec& spec) {
  if (spec.variant != FilterVariant::Spcnet) throw Error("k-gradient undefined for PCNET");
  detail::check_filter_inputs(l, b, spec);
  const auto c = pc_coefficients_grad_k(spec.k, spec.t, spec.n);
  return detail::propagate_sum(l, b, *c.dvalues_dk);
}

/// Pcnet mixing terms [B, S_1, ..., S_K] with S_κ = Σ_n C_n(κ, t) P_n, so
/// that ∂⟨G, apply_filter⟩/∂β_κ = ⟨G, terms[κ]⟩. One propagation pass.
inline std::vector<Matrix> pcnet_terms(const SparseSymMatrix& l, const Matrix& b,
                                       const FilterSpec& spec) {
  if (spec.variant != FilterVariant::Pcnet) throw Error("pcnet_terms requires a PCNET spec");
  detail::check_filter_inputs(l, b, spec);
  std::vector<std::vector<Real>> tables;
  std::vector<Matrix> terms;
  terms.push_back(b);
  for (int kappa = 1; kappa <= spec.big_k; ++kappa) {
    tables.push_back(pc_coefficients(static_cast<Real>(kappa), spec.t, spec.n).values);
    terms.push_back(tables.back()[0] * b);
  }
  Matrix p = b;
  for (int i = 1; i <= spec.n; ++i) {
    p = spmm(l, p) * (-1.0 / static_cast<Real>(i));
    for (int kappa = 1; kappa <= spec.big_k; ++kappa) {
      terms[kappa].noalias() += tables[kappa - 1][i] * p;
    }
  }
  return terms;
}

/// Σ_{n=1}^{N} |c_n| ρ^{n-1} / (n-1)!, the Lipschitz constant of the
/// non-identity filter with respect to the shift operator in spectral norm,
/// valid whenever both operators have spectral norm at most ρ.
/// ρ = 1 gives the classical constant Σ |C_n| / (n-1)!.
inline Real stability_constant(const FilterSpec& spec, Real spectral_radius = 1.0) {
  spec.validate();
  const auto c = series_coefficients(spec);
  Real sum = 0.0;
  Real scale = 1.0;  // ρ^{n-1} / (n-1)!
  for (int i = 1; i <= spec.n; ++i) {
    if (i > 1) scale *= spectral_radius / static_cast<Real>(i - 1);
    sum += std::abs(c[i]) * scale;
  }
  return sum;
}

/// Scalar response of the full filter (including identity and β_0 terms)
/// at Laplacian eigenvalue λ.
inline Real filter_response(const FilterSpec& spec, Real lambda) {
  spec.validate();
  const auto c = series_coefficients(spec);
  Real term = 1.0;
  Real sum = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (i > 0) term *= -lambda / static_cast<Real>(i);
    sum += c[i] * term;
  }
  if (spec.variant == FilterVariant::Pcnet) sum += spec.beta[0];
  if (spec.include_identity) sum += 1.0;
  return sum;
}

/// Dense matrix of the filter operator, built by propagating the identity.
inline Matrix filter_operator(const SparseSymMatrix& l, const FilterSpec& spec) {
  return apply_filter(l, Matrix::Identity(l.dim(), l.dim()), spec);
}

}  // namespace spcnet
