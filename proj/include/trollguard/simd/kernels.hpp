#pragma once

// Runtime-dispatched numeric kernels. Each ISA provides the same table of
// functions; the scalar table is the reference every other variant is tested
// against. Selection happens once, on first use:
//   TROLLGUARD_SIMD=scalar|avx2|neon forces a variant (falls back to scalar
//   if the requested one is unavailable on this CPU).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace trollguard::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  std::string_view name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // Σ val[i] * dense[idx[i]]
  double (*sparse_dot)(const std::uint32_t* idx, const double* val, std::size_t nnz,
                       const double* dense);
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  // y += alpha * x
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  std::size_t (*count_nonzero)(const std::uint8_t* x, std::size_t n);
  // number of positions where both a and b are nonzero
  std::size_t (*count_both)(const std::uint8_t* a, const std::uint8_t* b, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* table_for(Isa isa) noexcept;
const KernelTable& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size());
}

inline double sparse_dot(std::span<const std::uint32_t> idx, std::span<const double> val,
                         std::span<const double> dense) noexcept {
  return active().sparse_dot(idx.data(), val.data(), idx.size(), dense.data());
}

inline double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  return active().squared_distance(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) noexcept {
  active().axpy(alpha, x.data(), y.data(), x.size());
}

inline void scale(double alpha, std::span<double> x) noexcept {
  active().scale(alpha, x.data(), x.size());
}

inline std::size_t count_nonzero(std::span<const std::uint8_t> x) noexcept {
  return active().count_nonzero(x.data(), x.size());
}

inline std::size_t count_both(std::span<const std::uint8_t> a,
                              std::span<const std::uint8_t> b) noexcept {
  return active().count_both(a.data(), b.data(), a.size());
}

namespace detail {
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;
}  // namespace detail

}  // namespace trollguard::simd
