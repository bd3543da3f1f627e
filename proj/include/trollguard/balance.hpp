#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trollguard/vectorspace.hpp"

namespace trollguard {

struct SmoteConfig {
  std::size_t k_neighbors = 5;
  double target_ratio = 1.0;  // minority target = ceil(target_ratio * majority_count)
  std::uint64_t seed = 0;

  void validate() const;
};

/// Number of synthetic samples SMOTE will emit.
std::size_t smote_deficit(std::size_t minority_count, std::size_t majority_count,
                          double target_ratio) noexcept;

/// Synthetic minority samples, each x + u * (n - x) with n drawn from x's k
/// nearest minority neighbours (Euclidean). Base points are visited round-robin.
/// A singleton minority is duplicated. Throws EmptyMinority.
std::vector<SparseVector> smote_oversample(std::span<const SparseVector> minority,
                                           std::size_t majority_count, const SmoteConfig& cfg);

}  // namespace trollguard
