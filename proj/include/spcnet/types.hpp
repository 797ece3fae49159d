#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spcnet {

inline constexpr const char* kVersion = "0.1.0";

using Real = double;
using Index = std::int64_t;

// Dense blocks are row-major so a node's features are contiguous.
using Matrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline Real frobenius_dot(const Matrix& a, const Matrix& b) {
  return (a.array() * b.array()).sum();
}

}  // namespace spcnet
