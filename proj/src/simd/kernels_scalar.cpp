#include "trollguard/simd/kernels.hpp"

namespace trollguard::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

double sparse_dot(const std::uint32_t* idx, const double* val, std::size_t nnz,
                  const double* dense) {
  double sum = 0.0;
  for (std::size_t i = 0; i < nnz; ++i) sum += val[i] * dense[idx[i]];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void scale(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

std::size_t count_nonzero(const std::uint8_t* x, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += x[i] != 0;
  return count;
}

std::size_t count_both(const std::uint8_t* a, const std::uint8_t* b, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += (a[i] != 0) & (b[i] != 0);
  return count;
}

constexpr KernelTable kScalar{Isa::Scalar, "scalar",         dot,   sparse_dot,   squared_distance,
                              axpy,        scale,            count_nonzero, count_both};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace trollguard::simd
