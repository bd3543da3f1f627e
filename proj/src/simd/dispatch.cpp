#include <cstdlib>
#include <string_view>

#include "trollguard/simd/kernels.hpp"

namespace trollguard::simd {
namespace {

bool cpu_has(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(__x86_64__) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::Neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& select() noexcept {
  if (const char* forced = std::getenv("TROLLGUARD_SIMD")) {
    const std::string_view name(forced);
    if (name == "avx2") {
      if (auto* t = table_for(Isa::Avx2)) return *t;
    } else if (name == "neon") {
      if (auto* t = table_for(Isa::Neon)) return *t;
    }
    return scalar_table();
  }
  if (auto* t = table_for(Isa::Avx2)) return *t;
  if (auto* t = table_for(Isa::Neon)) return *t;
  return scalar_table();
}

}  // namespace

const KernelTable* table_for(Isa isa) noexcept {
  if (!cpu_has(isa)) return nullptr;
  switch (isa) {
    case Isa::Scalar: return &scalar_table();
    case Isa::Avx2: return detail::avx2_table();
    case Isa::Neon: return detail::neon_table();
  }
  return nullptr;
}

const KernelTable& active() noexcept {
  static const KernelTable& table = select();
  return table;
}

}  // namespace trollguard::simd
