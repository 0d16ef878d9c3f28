#include "projsplit/dense_matrix.hpp"

#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "projsplit/errors.hpp"
#include "projsplit/kernels.hpp"

namespace projsplit {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMajor> as_eigen(const DenseMatrix& a) {
  return {a.values().data(), static_cast<Eigen::Index>(a.rows()),
          static_cast<Eigen::Index>(a.cols())};
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
  if (data_.size() != rows_ * cols_)
    throw DimensionError(fmt::format("matrix: {} values for a {}x{} matrix", data_.size(), rows_,
                                     cols_));
}

DenseMatrix DenseMatrix::identity(std::size_t n, double scale) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

Vector DenseMatrix::apply(const Vector& x) const {
  if (x.dim() != cols_)
    throw DimensionError(fmt::format("matvec: {} columns vs vector of dim {}", cols_, x.dim()));
  const auto& k = kernels::active();
  Vector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = k.dot(row(r), x.data(), cols_);
  require_finite(out, "matvec");
  return out;
}

Vector DenseMatrix::apply_transpose(const Vector& x) const {
  if (x.dim() != rows_)
    throw DimensionError(fmt::format("matvec^T: {} rows vs vector of dim {}", rows_, x.dim()));
  const auto& k = kernels::active();
  Vector out(cols_);
  for (std::size_t r = 0; r < rows_; ++r) k.axpy(x[r], row(r), out.data(), cols_);
  require_finite(out, "matvec^T");
  return out;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

DenseMatrix DenseMatrix::gram() const { return transpose() * (*this); }

bool DenseMatrix::is_symmetric(double tol) const {
  if (!is_square()) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c)
      if (std::abs((*this)(r, c) - (*this)(c, r)) > tol) return false;
  return true;
}

DenseMatrix DenseMatrix::symmetric_part() const {
  if (!is_square()) throw DimensionError("symmetric_part: matrix is not square");
  DenseMatrix s(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) s(r, c) = 0.5 * ((*this)(r, c) + (*this)(c, r));
  return s;
}

DenseMatrix operator+(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw DimensionError("matrix +: shape mismatch");
  std::vector<double> v(a.values().size());
  kernels::active().axpby(1.0, a.values().data(), 1.0, b.values().data(), v.data(), v.size());
  return DenseMatrix(a.rows(), a.cols(), std::move(v));
}

DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix *: inner dimension mismatch");
  RowMajor prod = as_eigen(a) * as_eigen(b);
  return DenseMatrix(a.rows(), b.cols(),
                     std::vector<double>(prod.data(), prod.data() + prod.size()));
}

DenseMatrix operator*(double s, const DenseMatrix& a) {
  std::vector<double> v(a.values());
  for (double& x : v) x *= s;
  return DenseMatrix(a.rows(), a.cols(), std::move(v));
}

SymmetricSpectrum symmetric_spectrum(const DenseMatrix& a) {
  if (!a.is_square()) throw DimensionError("symmetric_spectrum: matrix is not square");
  if (a.rows() == 0) return {};
  const Eigen::MatrixXd sym = 0.5 * (as_eigen(a) + as_eigen(a).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

double spectral_norm(const DenseMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(as_eigen(a))};
  return svd.singularValues()(0);
}

Vector solve_linear(const DenseMatrix& a, const Vector& b) {
  if (!a.is_square() || a.rows() != b.dim()) throw DimensionError("solve_linear: bad shapes");
  const Eigen::MatrixXd m = as_eigen(a);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
  if (!lu.isInvertible()) throw ActivationError("solve_linear: singular system");
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(b.data(), b.dim());
  const Eigen::VectorXd x = lu.solve(rhs);
  Vector out(std::vector<double>(x.data(), x.data() + x.size()));
  require_finite(out, "solve_linear");
  return out;
}

}  // namespace projsplit
