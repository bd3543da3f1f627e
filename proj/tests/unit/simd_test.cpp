#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "trollguard/random.hpp"
#include "trollguard/simd/kernels.hpp"

using namespace trollguard;
using simd::Isa;

namespace {

std::vector<const simd::KernelTable*> accelerated() {
  std::vector<const simd::KernelTable*> out;
  for (Isa isa : {Isa::Avx2, Isa::Neon}) {
    if (const auto* t = simd::table_for(isa)) out.push_back(t);
  }
  return out;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform() * 2.0 - 1.0;
  return v;
}

void expect_close(double ref, double got) {
  EXPECT_NEAR(got, ref, 1e-12 * std::max(1.0, std::abs(ref)));
}

}  // namespace

TEST(SimdDispatch, ScalarAlwaysAvailable) {
  EXPECT_EQ(simd::table_for(Isa::Scalar), &simd::scalar_table());
  EXPECT_EQ(simd::scalar_table().isa, Isa::Scalar);
  const auto& active = simd::active();
  EXPECT_EQ(simd::table_for(active.isa), &active);
}

TEST(SimdEquivalence, DenseKernelsMatchScalarAcrossLengths) {
  const auto& ref = simd::scalar_table();
  Rng rng(11);
  for (const auto* t : accelerated()) {
    for (std::size_t n = 0; n <= 67; ++n) {
      const auto a = random_vector(rng, n);
      const auto b = random_vector(rng, n);
      expect_close(ref.dot(a.data(), b.data(), n), t->dot(a.data(), b.data(), n));
      expect_close(ref.squared_distance(a.data(), b.data(), n), t->squared_distance(a.data(), b.data(), n));

      auto y_ref = b;
      auto y_got = b;
      ref.axpy(0.37, a.data(), y_ref.data(), n);
      t->axpy(0.37, a.data(), y_got.data(), n);
      for (std::size_t i = 0; i < n; ++i) expect_close(y_ref[i], y_got[i]);

      ref.scale(-1.5, y_ref.data(), n);
      t->scale(-1.5, y_got.data(), n);
      for (std::size_t i = 0; i < n; ++i) expect_close(y_ref[i], y_got[i]);
    }
  }
}

TEST(SimdEquivalence, SparseDotMatchesScalar) {
  const auto& ref = simd::scalar_table();
  Rng rng(12);
  for (const auto* t : accelerated()) {
    for (std::size_t nnz = 0; nnz <= 41; ++nnz) {
      const std::size_t dim = 100;
      const auto dense = random_vector(rng, dim);
      std::vector<std::uint32_t> idx(nnz);
      for (auto& i : idx) i = static_cast<std::uint32_t>(rng.below(dim));
      const auto val = random_vector(rng, nnz);
      expect_close(ref.sparse_dot(idx.data(), val.data(), nnz, dense.data()),
                   t->sparse_dot(idx.data(), val.data(), nnz, dense.data()));
    }
  }
}

TEST(SimdEquivalence, CountKernelsAreExact) {
  const auto& ref = simd::scalar_table();
  Rng rng(13);
  for (const auto* t : accelerated()) {
    for (std::size_t n = 0; n <= 300; n += 7) {
      std::vector<std::uint8_t> a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = static_cast<std::uint8_t>(rng.below(3) == 0 ? rng.below(256) : 0);
        b[i] = static_cast<std::uint8_t>(rng.below(2));
      }
      EXPECT_EQ(ref.count_nonzero(a.data(), n), t->count_nonzero(a.data(), n));
      EXPECT_EQ(ref.count_both(a.data(), b.data(), n), t->count_both(a.data(), b.data(), n));
    }
  }
}

TEST(SimdScalar, ReferenceValues) {
  const auto& s = simd::scalar_table();
  const double a[] = {1, 2, 3};
  const double b[] = {4, -5, 6};
  EXPECT_DOUBLE_EQ(s.dot(a, b, 3), 12.0);
  EXPECT_DOUBLE_EQ(s.squared_distance(a, b, 3), 9.0 + 49.0 + 9.0);
  const std::uint32_t idx[] = {2, 0};
  const double val[] = {0.5, 2.0};
  EXPECT_DOUBLE_EQ(s.sparse_dot(idx, val, 2, b), 3.0 + 8.0);
  const std::uint8_t x[] = {0, 1, 2, 0, 9};
  const std::uint8_t y[] = {1, 1, 0, 0, 1};
  EXPECT_EQ(s.count_nonzero(x, 5), 3u);
  EXPECT_EQ(s.count_both(x, y, 5), 2u);
}
