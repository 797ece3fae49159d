#pragma once

#include "spcnet/types.hpp"

#include <cmath>
#include <numeric>
#include <vector>

namespace spcnet {

struct Summary {
  Real mean = 0.0;
  Real std = 0.0;   // sample standard deviation (n - 1); 0 for a single value
  Real ci95 = 0.0;  // 1.96 · std / √n
  std::size_t n = 0;
};

inline Summary summarize(const std::vector<Real>& xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<Real>(xs.size());
  if (xs.size() > 1) {
    Real ss = 0.0;
    for (Real x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<Real>(xs.size() - 1));
  }
  s.ci95 = 1.96 * s.std / std::sqrt(static_cast<Real>(xs.size()));
  return s;
}

}  // namespace spcnet
