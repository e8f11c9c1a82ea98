#ifndef SMNAE_TESTS_HELPERS_HPP
#define SMNAE_TESTS_HELPERS_HPP

#include <cmath>
#include <vector>

#include "smnae/matrix.hpp"

namespace smnae::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, Seed seed, double lo = -1.0,
                            double hi = 1.0) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, std::abs(a.data()[i] - b.data()[i]));
  return worst;
}

// Plain triple-loop product, the oracle for matmul.
inline Matrix matmul_oracle(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace smnae::testing

#endif
