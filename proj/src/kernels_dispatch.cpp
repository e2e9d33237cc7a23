#include <cstdlib>
#include <string>

#include "drc/kernels.hpp"

namespace drc::kernels {

#if defined(DRC_HAVE_AVX2)
const KernelTable& avx2_kernels_table();
#endif

bool cpu_supports_avx2() {
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* avx2_kernels() {
#if defined(DRC_HAVE_AVX2)
  return &avx2_kernels_table();
#else
  return nullptr;
#endif
}

namespace {

const KernelTable* pick(std::string_view which) {
  if (which == "scalar") return &scalar_kernels();
  if (which == "avx2") return (avx2_kernels() && cpu_supports_avx2()) ? avx2_kernels() : nullptr;
  if (which == "auto" || which.empty()) {
    if (const KernelTable* t = pick("avx2")) return t;
    return &scalar_kernels();
  }
  return nullptr;
}

const KernelTable*& current() {
  static const KernelTable* table = [] {
    const char* env = std::getenv("DRC_KERNELS");
    const KernelTable* t = pick(env ? std::string_view(env) : std::string_view("auto"));
    return t ? t : &scalar_kernels();
  }();
  return table;
}

}  // namespace

const KernelTable& active() { return *current(); }

bool select(std::string_view which) {
  const KernelTable* t = pick(which);
  if (!t) return false;
  current() = t;
  return true;
}

}  // namespace drc::kernels
