#include "trollguard/balance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "trollguard/error.hpp"
#include "trollguard/random.hpp"
#include "trollguard/simd/kernels.hpp"

namespace trollguard {
namespace {

// Interpolates over the union of the two index sets; exact zeros are dropped.
SparseVector interpolate(const SparseVector& x, const SparseVector& n, double u) {
  SparseVector out;
  out.dim = x.dim;
  std::size_t i = 0;
  std::size_t j = 0;
  auto emit = [&](std::uint32_t index, double xv, double nv) {
    const double v = xv + u * (nv - xv);
    if (v != 0.0) {
      out.indices.push_back(index);
      out.values.push_back(v);
    }
  };
  while (i < x.nnz() || j < n.nnz()) {
    if (j == n.nnz() || (i < x.nnz() && x.indices[i] < n.indices[j])) {
      emit(x.indices[i], x.values[i], 0.0);
      ++i;
    } else if (i == x.nnz() || n.indices[j] < x.indices[i]) {
      emit(n.indices[j], 0.0, n.values[j]);
      ++j;
    } else {
      emit(x.indices[i], x.values[i], n.values[j]);
      ++i;
      ++j;
    }
  }
  return out;
}

// k nearest neighbours of every minority point, ties broken by index.
std::vector<std::vector<std::size_t>> neighbour_lists(std::span<const SparseVector> minority,
                                                      std::size_t k) {
  const std::size_t m = minority.size();
  const std::size_t dim = minority.front().dim;
  std::vector<std::vector<double>> dense;
  dense.reserve(m);
  for (const auto& v : minority) dense.push_back(v.to_dense());

  std::vector<std::vector<std::size_t>> lists(m);
  std::vector<std::pair<double, std::size_t>> dist;
  for (std::size_t a = 0; a < m; ++a) {
    dist.clear();
    for (std::size_t b = 0; b < m; ++b) {
      if (b == a) continue;
      dist.emplace_back(simd::active().squared_distance(dense[a].data(), dense[b].data(), dim), b);
    }
    const std::size_t take = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(take), dist.end());
    for (std::size_t t = 0; t < take; ++t) lists[a].push_back(dist[t].second);
  }
  return lists;
}

}  // namespace

void SmoteConfig::validate() const {
  if (k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "SMOTE needs k >= 1");
  if (!(target_ratio > 0.0) || !std::isfinite(target_ratio)) {
    throw Error(ErrorCode::InvalidArgument, "SMOTE target_ratio must be > 0");
  }
}

std::size_t smote_deficit(std::size_t minority_count, std::size_t majority_count,
                          double target_ratio) noexcept {
  const auto target = static_cast<std::size_t>(
      std::ceil(target_ratio * static_cast<double>(majority_count) - 1e-9));
  return target > minority_count ? target - minority_count : 0;
}

std::vector<SparseVector> smote_oversample(std::span<const SparseVector> minority,
                                           std::size_t majority_count, const SmoteConfig& cfg) {
  cfg.validate();
  if (minority.empty()) throw Error(ErrorCode::EmptyMinority, "SMOTE needs at least one minority sample");
  for (const auto& v : minority) {
    if (v.dim != minority.front().dim) {
      throw Error(ErrorCode::DimensionMismatch, "minority vectors differ in dimension");
    }
  }
  const std::size_t count = smote_deficit(minority.size(), majority_count, cfg.target_ratio);
  std::vector<SparseVector> synthetic;
  if (count == 0) return synthetic;
  synthetic.reserve(count);

  if (minority.size() == 1) {
    synthetic.assign(count, minority.front());
    return synthetic;
  }

  const auto neighbours = neighbour_lists(minority, cfg.k_neighbors);
  Rng rng(cfg.seed);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t base = s % minority.size();
    const auto& pool = neighbours[base];
    const std::size_t pick = pool[rng.below(pool.size())];
    const double u = rng.uniform();
    synthetic.push_back(interpolate(minority[base], minority[pick], u));
  }
  return synthetic;
}

}  // namespace trollguard
