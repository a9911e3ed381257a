#pragma once

#include <cmath>
#include <cstdint>

#include "locrom/numerics.hpp"
#include "locrom/rng.hpp"

namespace testutil {

inline locrom::Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  locrom::Rng rng(seed);
  locrom::Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = rng.uniform(-1.0, 1.0);
  }
  return m;
}

inline locrom::Vector random_vector(int n, std::uint64_t seed) {
  return random_matrix(n, 1, seed).col(0);
}

inline double max_abs(const locrom::Matrix& m) { return m.cwiseAbs().maxCoeff(); }

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

}  // namespace testutil
