#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trollguard/corpus.hpp"
#include "trollguard/vectorspace.hpp"

namespace trollguard {

/// 1 - sum p_i^2. Throws EmptySet when the counts sum to zero.
double gini_impurity(std::span<const std::size_t> class_counts);

struct TreeParams {
  std::size_t max_depth = 20;
  std::size_t min_samples_split = 2;
};

struct TreeNode {
  static constexpr std::int32_t kLeaf = -1;

  std::int32_t feature = kLeaf;
  double threshold = 0.0;  // x[feature] <= threshold goes left
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::size_t, 2> counts{};  // {non-troll, troll}

  bool is_leaf() const noexcept { return feature == kLeaf; }
  std::size_t samples() const noexcept { return counts[0] + counts[1]; }
};

/// CART classifier over sparse rows. Node 0 is the root.
class DecisionTree {
 public:
  DecisionTree(std::vector<TreeNode> nodes, std::size_t n_features, TreeParams params)
      : nodes_(std::move(nodes)), n_features_(n_features), params_(params) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::size_t n_features() const noexcept { return n_features_; }
  const TreeParams& params() const noexcept { return params_; }
  std::size_t depth() const;
  const TreeNode& leaf_for(const SparseVector& x) const;
  /// Majority class of the leaf; ties go to NonTroll.
  Label predict(const SparseVector& x) const;

 private:
  std::vector<TreeNode> nodes_;
  std::size_t n_features_;
  TreeParams params_;
};

/// Greedy Gini growth. Splits must strictly lower weighted impurity; ties go to
/// the lowest feature index, then the lowest threshold. Throws SingleClass.
DecisionTree train_substitute(std::span<const SparseVector> rows, std::span<const Label> labels,
                              const TreeParams& params = {});

/// Weighted impurity decrease per feature, normalised to sum to 1. A tree with
/// no split yields all zeros.
std::vector<double> feature_importances(const DecisionTree& tree);

struct Correlation {
  double r = 0.0;
  double p = 1.0;
};

/// Pearson r of two 0/1 vectors with a two-sided Student-t p-value (n - 2 dof).
/// Throws InvalidArgument for n < 3 or unequal lengths, ConstantVector when either is constant.
Correlation pearson_correlation(std::span<const std::uint8_t> presence,
                                std::span<const std::uint8_t> labels);

/// Regularised incomplete beta I_x(a, b).
double regularized_incomplete_beta(double a, double b, double x);
/// P(|T| >= |t|) for Student's t with dof degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct TargetWord {
  std::string token;  // hashtag targets carry no '#'
  Channel channel = Channel::Text;
  double importance = 0.0;
  double r = 0.0;
  double p = 1.0;

  friend bool operator==(const TargetWord&, const TargetWord&) = default;
};

struct TargetWordList {
  std::vector<TargetWord> entries;
  std::string provenance = "{}";  // opaque JSON object

  std::string to_json() const;
  static TargetWordList from_json(std::string_view text);
  std::uint64_t fingerprint() const;
};

inline constexpr double kTargetPValue = 0.05;

/// Rows restricted to the [text | hashtag] columns of the space.
SparseVector text_channels(const SparseVector& full, const FeatureSpace& space);

/// importances and rows are indexed over the text+hashtag columns of the space.
/// A column is a target when importance > 0, r > 0 and p < 0.05; constant
/// columns are skipped.
TargetWordList select_targets(const FeatureSpace& space, std::span<const double> importances,
                              std::span<const SparseVector> rows, std::span<const Label> labels,
                              std::size_t threads = 1);

void save_targets(const TargetWordList& list, const std::filesystem::path& path);
TargetWordList load_targets(const std::filesystem::path& path);

}  // namespace trollguard
