#pragma once

// Finite-dimensional stand-in for the Hilbert space H and the product space
// H^n = H x H^{n-1} carrying points p = (z, w_1, ..., w_{n-1}) with the
// gamma-weighted inner product  <p1, p2>_gamma = gamma <z1, z2> + sum_i <w1_i, w2_i>.

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace projsplit {

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t dim, double fill = 0.0) : data_(dim, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  static Vector zeros(std::size_t dim) { return Vector(dim); }

  std::size_t dim() const noexcept { return data_.size(); }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> span() noexcept { return data_; }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  bool operator==(const Vector&) const = default;

  Vector& operator+=(const Vector& other);
  Vector& operator-=(const Vector& other);
  Vector& operator*=(double a);

 private:
  std::vector<double> data_;
};

Vector operator+(const Vector& a, const Vector& b);
Vector operator-(const Vector& a, const Vector& b);
Vector operator-(const Vector& a);
Vector operator*(double a, const Vector& x);

double dot(const Vector& a, const Vector& b);
double norm_sq(const Vector& a);
double norm(const Vector& a);
double dist_sq(const Vector& a, const Vector& b);
// a*x + y
Vector axpy(double a, const Vector& x, const Vector& y);
bool all_finite(const Vector& x);

// Throws NonFiniteError naming `what` when x has a NaN/Inf entry.
void require_finite(const Vector& x, const char* what);
void require_finite(double v, const char* what);
void require_same_dim(const Vector& a, const Vector& b, const char* what);

// (z, w_1, ..., w_{n-1}) with metric weight gamma. n = w.size() + 1; the n = 1
// case carries an empty w. w_n := -sum_i w_i is derived, never stored.
class ProductPoint {
 public:
  ProductPoint() = default;
  ProductPoint(Vector z, std::vector<Vector> w, double gamma);

  static ProductPoint zeros(std::size_t dim, std::size_t n, double gamma);

  const Vector& z() const noexcept { return z_; }
  Vector& z() noexcept { return z_; }
  const std::vector<Vector>& w() const noexcept { return w_; }
  std::vector<Vector>& w() noexcept { return w_; }
  const Vector& w(std::size_t i) const { return w_.at(i); }
  Vector& w(std::size_t i) { return w_.at(i); }

  double gamma() const noexcept { return gamma_; }
  std::size_t n() const noexcept { return w_.size() + 1; }
  std::size_t dim() const noexcept { return z_.dim(); }

  bool operator==(const ProductPoint&) const = default;

 private:
  Vector z_;
  std::vector<Vector> w_;
  double gamma_ = 1.0;
};

double gamma_norm_sq(const ProductPoint& p);
double gamma_inner(const ProductPoint& p1, const ProductPoint& p2);
double gamma_dist_sq(const ProductPoint& p1, const ProductPoint& p2);
// a*x + y, componentwise.
ProductPoint axpy(double a, const ProductPoint& x, const ProductPoint& y);
// -sum_{i<n} w_i; the zero vector when n = 1.
Vector wn_of(const ProductPoint& p);

void require_same_shape(const ProductPoint& a, const ProductPoint& b, const char* what);

}  // namespace projsplit
