#pragma once

#include <cstddef>
#include <vector>

#include "projsplit/space.hpp"

namespace projsplit {

// Row-major dense matrix. Products go through the kernel dispatch table.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);

  static DenseMatrix identity(std::size_t n, double scale = 1.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool operator==(const DenseMatrix&) const = default;

  Vector apply(const Vector& x) const;
  Vector apply_transpose(const Vector& x) const;
  DenseMatrix transpose() const;
  DenseMatrix gram() const;  // A^T A

  bool is_square() const noexcept { return rows_ == cols_; }
  bool is_symmetric(double tol = 0.0) const;
  DenseMatrix symmetric_part() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix operator*(double s, const DenseMatrix& a);

// Spectral helpers (Eigen-backed).
struct SymmetricSpectrum {
  double min = 0.0;
  double max = 0.0;
};
// Extreme eigenvalues of the symmetric part (A + A^T)/2.
SymmetricSpectrum symmetric_spectrum(const DenseMatrix& a);
// Largest singular value (operator 2-norm).
double spectral_norm(const DenseMatrix& a);
// Solves A x = b (full-pivot LU); throws ActivationError if A is singular.
Vector solve_linear(const DenseMatrix& a, const Vector& b);

}  // namespace projsplit
