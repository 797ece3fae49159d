#pragma once

#include "spcnet/types.hpp"

#include <optional>
#include <vector>

namespace spcnet {

/// Poisson–Charlier values C_0(k, t) .. C_N(k, t), the coefficients of
/// (1 - λ)^k e^{tλ} = Σ_n C_n(k, t) (-λ)^n / n!.
struct PcCoefficients {
  Real order_k = 1.0;
  Real time_t = 0.0;
  int truncation_n = 0;
  std::vector<Real> values;
  std::optional<std::vector<Real>> dvalues_dk;
};

namespace detail {

inline void check_pc_args(Real t, int n) {
  if (n < 0) throw Error("truncation N must be non-negative");
  if (!(t >= 0.0)) throw Error("time t must be non-negative");
}

}  // namespace detail

/// Three-term recurrence:
///   C_0 = 1, C_1 = k - t, C_n = (k - n - t + 1) C_{n-1} - (n - 1) t C_{n-2}.
inline PcCoefficients pc_coefficients(Real k, Real t, int n) {
  detail::check_pc_args(t, n);
  PcCoefficients c{k, t, n, std::vector<Real>(static_cast<std::size_t>(n) + 1), std::nullopt};
  auto& v = c.values;
  v[0] = 1.0;
  if (n >= 1) v[1] = k - t;
  for (int i = 2; i <= n; ++i) {
    v[i] = (k - i - t + 1.0) * v[i - 1] - (i - 1) * t * v[i - 2];
  }
  return c;
}

/// As pc_coefficients, plus ∂C_n/∂k from differentiating the recurrence:
///   ∂C_n/∂k = C_{n-1} + (k - n - t + 1) ∂C_{n-1}/∂k - (n - 1) t ∂C_{n-2}/∂k.
inline PcCoefficients pc_coefficients_grad_k(Real k, Real t, int n) {
  PcCoefficients c = pc_coefficients(k, t, n);
  std::vector<Real> d(static_cast<std::size_t>(n) + 1, 0.0);
  if (n >= 1) d[1] = 1.0;
  for (int i = 2; i <= n; ++i) {
    d[i] = c.values[i - 1] + (k - i - t + 1.0) * d[i - 1] - (i - 1) * t * d[i - 2];
  }
  c.dvalues_dk = std::move(d);
  return c;
}

/// Truncated response Σ_{n=0}^{N} C_n (-λ)^n / n!, without identity mapping.
inline Real series_response(const PcCoefficients& c, Real lambda) {
  Real term = 1.0;  // (-λ)^n / n!
  Real sum = 0.0;
  for (std::size_t i = 0; i < c.values.size(); ++i) {
    if (i > 0) term *= -lambda / static_cast<Real>(i);
    sum += c.values[i] * term;
  }
  return sum;
}

/// Filter response with identity mapping: 1 + Σ_{n=0}^{N} C_n (-λ)^n / n!.
inline Real frequency_response(const PcCoefficients& c, Real lambda) {
  return 1.0 + series_response(c, lambda);
}

}  // namespace spcnet
