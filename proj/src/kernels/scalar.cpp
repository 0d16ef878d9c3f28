#include "projsplit/kernels.hpp"

#include <cmath>

namespace projsplit::kernels {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double norm_sq_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * x[i];
  return s;
}

double dist_sq_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double t = a * x[i];
    y[i] = t + y[i];
  }
}

void axpby_scalar(double a, const double* x, double b, const double* y, double* out,
                  std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = a * x[i];
    const double t = b * y[i];
    out[i] = s + t;
  }
}

bool all_finite_scalar(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace

const Table& scalar_table() {
  static const Table table{Backend::kScalar, "scalar",     dot_scalar,   norm_sq_scalar,
                           dist_sq_scalar,   axpy_scalar,  axpby_scalar, all_finite_scalar};
  return table;
}

}  // namespace projsplit::kernels
