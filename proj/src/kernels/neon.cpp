#include "projsplit/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace projsplit::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double norm_sq_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

double dist_sq_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    s += d * d;
  }
  return s;
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vaddq_f64(vmulq_f64(va, vld1q_f64(x + i)), vld1q_f64(y + i)));
  for (; i < n; ++i) {
    const double t = a * x[i];
    y[i] = t + y[i];
  }
}

void axpby_neon(double a, const double* x, double b, const double* y, double* out,
                std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(out + i,
              vaddq_f64(vmulq_f64(va, vld1q_f64(x + i)), vmulq_f64(vb, vld1q_f64(y + i))));
  for (; i < n; ++i) {
    const double s = a * x[i];
    const double t = b * y[i];
    out[i] = s + t;
  }
}

bool all_finite_neon(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) return false;
  return true;
}

}  // namespace

namespace detail {

const Table* neon_table() {
  static const Table table{Backend::kNeon, "neon",     dot_neon,   norm_sq_neon,
                           dist_sq_neon,   axpy_neon,  axpby_neon, all_finite_neon};
  return &table;
}

}  // namespace detail
}  // namespace projsplit::kernels
