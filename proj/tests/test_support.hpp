#pragma once

// Seeded random vectors and points for property tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <vector>

#include "projsplit/dense_matrix.hpp"
#include "projsplit/space.hpp"

namespace projsplit {

// gtest printer
inline void PrintTo(const Vector& v, std::ostream* os) {
  *os << '(';
  for (std::size_t i = 0; i < v.dim(); ++i) *os << (i ? ", " : "") << v[i];
  *os << ')';
}

}  // namespace projsplit

namespace projsplit::testing {

inline Vector random_vector(std::mt19937_64& rng, std::size_t dim, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Vector v(dim);
  for (double& x : v) x = n(rng);
  return v;
}

inline ProductPoint random_point(std::mt19937_64& rng, std::size_t dim, std::size_t n,
                                 double gamma) {
  std::vector<Vector> w;
  for (std::size_t i = 0; i + 1 < n; ++i) w.push_back(random_vector(rng, dim));
  return ProductPoint(random_vector(rng, dim), std::move(w), gamma);
}

inline DenseMatrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  DenseMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = n(rng);
  return m;
}

// B^T B / dim + shift I: symmetric PSD.
inline DenseMatrix random_psd(std::mt19937_64& rng, std::size_t dim, double shift = 0.0) {
  const DenseMatrix b = random_matrix(rng, dim, dim);
  DenseMatrix g = (1.0 / static_cast<double>(dim)) * b.gram();
  for (std::size_t i = 0; i < dim; ++i) g(i, i) += shift;
  // exact symmetry
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t c = r + 1; c < dim; ++c) g(c, r) = g(r, c);
  return g;
}

inline double max_abs_diff(const Vector& a, const Vector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace projsplit::testing
