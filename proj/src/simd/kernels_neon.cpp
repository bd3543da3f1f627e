#include "trollguard/simd/kernels.hpp"

#if defined(__aarch64__) && defined(__ARM_NEON)

#include <arm_neon.h>

namespace trollguard::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

// No gather on NEON; pairs are loaded lane by lane.
double sparse_dot(const std::uint32_t* idx, const double* val, std::size_t nnz,
                  const double* dense) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= nnz; i += 2) {
    float64x2_t gathered = vdupq_n_f64(dense[idx[i]]);
    gathered = vsetq_lane_f64(dense[idx[i + 1]], gathered, 1);
    acc = vfmaq_f64(acc, vld1q_f64(val + i), gathered);
  }
  double sum = vaddvq_f64(acc);
  for (; i < nnz; ++i) sum += val[i] * dense[idx[i]];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, d, d);
  }
  double sum = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), alpha));
  for (; i < n; ++i) x[i] *= alpha;
}

std::size_t count_nonzero(const std::uint8_t* x, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t nz = vtstq_u8(vld1q_u8(x + i), vld1q_u8(x + i));
    count += vaddvq_u8(vshrq_n_u8(nz, 7));
  }
  for (; i < n; ++i) count += x[i] != 0;
  return count;
}

std::size_t count_both(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    const uint8x16_t va = vld1q_u8(a + i);
    const uint8x16_t vb = vld1q_u8(b + i);
    const uint8x16_t both = vandq_u8(vtstq_u8(va, va), vtstq_u8(vb, vb));
    count += vaddvq_u8(vshrq_n_u8(both, 7));
  }
  for (; i < n; ++i) count += (a[i] != 0) & (b[i] != 0);
  return count;
}

constexpr KernelTable kNeon{Isa::Neon, "neon",         dot,   sparse_dot,   squared_distance,
                            axpy,      scale,          count_nonzero, count_both};

}  // namespace

namespace detail {
const KernelTable* neon_table() noexcept { return &kNeon; }
}  // namespace detail

}  // namespace trollguard::simd

#else

namespace trollguard::simd::detail {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace trollguard::simd::detail

#endif
