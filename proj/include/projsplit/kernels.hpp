#pragma once

// Dense double-precision vector kernels.
//
// Every kernel has a scalar reference implementation. Wider variants (AVX2+FMA on
// x86-64, NEON on aarch64) are compiled into separate translation units and picked
// once at runtime. Elementwise kernels are bitwise identical across backends;
// reductions agree to within normal summation-order rounding.
//
// Set PROJSPLIT_KERNELS=scalar (or avx2 / neon) to force a backend.

#include <cstddef>
#include <string_view>

namespace projsplit::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

struct Table {
  Backend backend;
  std::string_view name;

  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*norm_sq)(const double* x, std::size_t n);
  double (*dist_sq)(const double* x, const double* y, std::size_t n);
  // y <- a*x + y
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out <- a*x + b*y ; out may alias x or y
  void (*axpby)(double a, const double* x, double b, const double* y, double* out,
                std::size_t n);
  bool (*all_finite)(const double* x, std::size_t n);
};

const Table& scalar_table();

// nullptr when the backend was not compiled in or the CPU lacks the extension.
const Table* table_for(Backend backend);

// Backend used by the library. Resolved on first call and fixed afterwards.
const Table& active();

std::string_view backend_name(Backend backend);

namespace detail {
const Table* avx2_table();
const Table* neon_table();
}  // namespace detail

}  // namespace projsplit::kernels
