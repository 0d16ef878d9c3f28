#include <cstdlib>
#include <string_view>

#include "projsplit/kernels.hpp"

namespace projsplit::kernels {

#if !defined(PROJSPLIT_HAVE_AVX2)
const Table* detail::avx2_table() { return nullptr; }
#endif
#if !defined(PROJSPLIT_HAVE_NEON)
const Table* detail::neon_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(PROJSPLIT_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table& resolve() {
  const char* forced = std::getenv("PROJSPLIT_KERNELS");
  if (forced != nullptr) {
    const std::string_view want(forced);
    if (want == "scalar") return scalar_table();
    if (want == "avx2" && table_for(Backend::kAvx2) != nullptr) return *table_for(Backend::kAvx2);
    if (want == "neon" && table_for(Backend::kNeon) != nullptr) return *table_for(Backend::kNeon);
  }
  if (const Table* t = table_for(Backend::kAvx2)) return *t;
  if (const Table* t = table_for(Backend::kNeon)) return *t;
  return scalar_table();
}

}  // namespace

const Table* table_for(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return &scalar_table();
    case Backend::kAvx2:
      return cpu_has_avx2() ? detail::avx2_table() : nullptr;
    case Backend::kNeon:
      return detail::neon_table();  // NEON is mandatory on aarch64
  }
  return nullptr;
}

const Table& active() {
  static const Table& table = resolve();
  return table;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::kScalar:
      return "scalar";
    case Backend::kAvx2:
      return "avx2";
    case Backend::kNeon:
      return "neon";
  }
  return "unknown";
}

}  // namespace projsplit::kernels
