#include "projsplit/space.hpp"

#include <cmath>

#include <fmt/format.h>

#include "projsplit/errors.hpp"
#include "projsplit/kernels.hpp"

namespace projsplit {

void require_finite(const Vector& x, const char* what) {
  if (!kernels::active().all_finite(x.data(), x.dim()))
    throw NonFiniteError(fmt::format("non-finite entry in {}", what));
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteError(fmt::format("non-finite value for {}", what));
}

void require_same_dim(const Vector& a, const Vector& b, const char* what) {
  if (a.dim() != b.dim())
    throw DimensionError(fmt::format("{}: dimension mismatch ({} vs {})", what, a.dim(), b.dim()));
}

Vector& Vector::operator+=(const Vector& other) {
  require_same_dim(*this, other, "vector +=");
  kernels::active().axpy(1.0, other.data(), data(), dim());
  require_finite(*this, "vector +=");
  return *this;
}

Vector& Vector::operator-=(const Vector& other) {
  require_same_dim(*this, other, "vector -=");
  kernels::active().axpy(-1.0, other.data(), data(), dim());
  require_finite(*this, "vector -=");
  return *this;
}

Vector& Vector::operator*=(double a) {
  kernels::active().axpby(a, data(), 0.0, data(), data(), dim());
  require_finite(*this, "vector *=");
  return *this;
}

Vector operator+(const Vector& a, const Vector& b) {
  Vector out = a;
  out += b;
  return out;
}

Vector operator-(const Vector& a, const Vector& b) {
  Vector out = a;
  out -= b;
  return out;
}

Vector operator-(const Vector& a) {
  Vector out = a;
  for (double& v : out) v = -v;
  return out;
}

Vector operator*(double a, const Vector& x) {
  Vector out = x;
  out *= a;
  return out;
}

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  const double v = kernels::active().dot(a.data(), b.data(), a.dim());
  require_finite(v, "dot");
  return v;
}

double norm_sq(const Vector& a) {
  const double v = kernels::active().norm_sq(a.data(), a.dim());
  require_finite(v, "norm_sq");
  return v;
}

double norm(const Vector& a) { return std::sqrt(norm_sq(a)); }

double dist_sq(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dist_sq");
  const double v = kernels::active().dist_sq(a.data(), b.data(), a.dim());
  require_finite(v, "dist_sq");
  return v;
}

Vector axpy(double a, const Vector& x, const Vector& y) {
  require_same_dim(x, y, "axpy");
  Vector out = y;
  kernels::active().axpy(a, x.data(), out.data(), out.dim());
  require_finite(out, "axpy");
  return out;
}

bool all_finite(const Vector& x) { return kernels::active().all_finite(x.data(), x.dim()); }

ProductPoint::ProductPoint(Vector z, std::vector<Vector> w, double gamma)
    : z_(std::move(z)), w_(std::move(w)), gamma_(gamma) {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_))
    throw DimensionError(fmt::format("product point: gamma must be positive, got {}", gamma_));
  for (const Vector& wi : w_) require_same_dim(z_, wi, "product point");
}

ProductPoint ProductPoint::zeros(std::size_t dim, std::size_t n, double gamma) {
  if (n == 0) throw DimensionError("product point: n must be at least 1");
  return ProductPoint(Vector(dim), std::vector<Vector>(n - 1, Vector(dim)), gamma);
}

void require_same_shape(const ProductPoint& a, const ProductPoint& b, const char* what) {
  if (a.n() != b.n() || a.dim() != b.dim())
    throw DimensionError(fmt::format("{}: shape mismatch (n={}, d={} vs n={}, d={})", what, a.n(),
                                     a.dim(), b.n(), b.dim()));
  if (a.gamma() != b.gamma())
    throw DimensionError(
        fmt::format("{}: gamma mismatch ({} vs {})", what, a.gamma(), b.gamma()));
}

double gamma_norm_sq(const ProductPoint& p) {
  double s = p.gamma() * norm_sq(p.z());
  for (const Vector& wi : p.w()) s += norm_sq(wi);
  require_finite(s, "gamma_norm_sq");
  return s;
}

double gamma_inner(const ProductPoint& p1, const ProductPoint& p2) {
  require_same_shape(p1, p2, "gamma_inner");
  double s = p1.gamma() * dot(p1.z(), p2.z());
  for (std::size_t i = 0; i < p1.w().size(); ++i) s += dot(p1.w(i), p2.w(i));
  require_finite(s, "gamma_inner");
  return s;
}

double gamma_dist_sq(const ProductPoint& p1, const ProductPoint& p2) {
  require_same_shape(p1, p2, "gamma_dist_sq");
  double s = p1.gamma() * dist_sq(p1.z(), p2.z());
  for (std::size_t i = 0; i < p1.w().size(); ++i) s += dist_sq(p1.w(i), p2.w(i));
  require_finite(s, "gamma_dist_sq");
  return s;
}

ProductPoint axpy(double a, const ProductPoint& x, const ProductPoint& y) {
  require_same_shape(x, y, "axpy");
  std::vector<Vector> w;
  w.reserve(x.w().size());
  for (std::size_t i = 0; i < x.w().size(); ++i) w.push_back(axpy(a, x.w(i), y.w(i)));
  return ProductPoint(axpy(a, x.z(), y.z()), std::move(w), y.gamma());
}

Vector wn_of(const ProductPoint& p) {
  Vector out(p.dim());
  for (const Vector& wi : p.w()) out -= wi;
  return out;
}

}  // namespace projsplit
