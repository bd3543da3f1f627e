#include "trollguard/targets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "trollguard/error.hpp"
#include "trollguard/hashing.hpp"
#include "trollguard/parallel.hpp"
#include "trollguard/simd/kernels.hpp"

namespace trollguard {
namespace {

constexpr int kTargetsVersion = 1;
// Gains within this margin count as ties (and a split must beat it to happen).
constexpr double kGainEpsilon = 1e-12;

std::size_t class_index(Label label) noexcept { return label == Label::Troll ? 1 : 0; }

// n * Gini for a node with the given binary counts.
double weighted_gini(std::size_t c0, std::size_t c1) noexcept {
  const double n = static_cast<double>(c0 + c1);
  if (n == 0.0) return 0.0;
  const double a = static_cast<double>(c0);
  const double b = static_cast<double>(c1);
  return n - (a * a + b * b) / n;
}

struct Column {
  std::vector<std::uint32_t> rows;
  std::vector<double> values;
};

std::vector<Column> to_columns(std::span<const SparseVector> rows, std::size_t n_features) {
  std::vector<Column> cols(n_features);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& x = rows[r];
    for (std::size_t j = 0; j < x.nnz(); ++j) {
      cols[x.indices[j]].rows.push_back(static_cast<std::uint32_t>(r));
      cols[x.indices[j]].values.push_back(x.values[j]);
    }
  }
  return cols;
}

class TreeBuilder {
 public:
  TreeBuilder(std::span<const SparseVector> rows, std::span<const Label> labels, const TreeParams& params)
      : labels_(labels),
        params_(params),
        n_features_(rows.front().dim),
        columns_(to_columns(rows, n_features_)),
        stamp_(rows.size(), 0),
        scratch_(rows.size(), 0.0) {}

  std::vector<TreeNode> build() {
    std::vector<std::uint32_t> all(labels_.size());
    for (std::uint32_t i = 0; i < all.size(); ++i) all[i] = i;
    grow(all, 0);
    return std::move(nodes_);
  }

  std::size_t n_features() const noexcept { return n_features_; }

 private:
  struct Split {
    std::int32_t feature = TreeNode::kLeaf;
    double threshold = 0.0;
    double gain = kGainEpsilon;
  };

  std::int32_t grow(const std::vector<std::uint32_t>& members, std::size_t depth) {
    TreeNode node;
    for (auto r : members) ++node.counts[class_index(labels_[r])];
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);

    const bool pure = node.counts[0] == 0 || node.counts[1] == 0;
    if (pure || depth >= params_.max_depth || members.size() < params_.min_samples_split) return id;

    const Split best = find_split(members, node.counts);
    if (best.feature == TreeNode::kLeaf) return id;

    const auto& col = columns_[static_cast<std::size_t>(best.feature)];
    for (std::size_t j = 0; j < col.rows.size(); ++j) scratch_[col.rows[j]] = col.values[j];
    std::vector<std::uint32_t> left;
    std::vector<std::uint32_t> right;
    for (auto r : members) (scratch_[r] <= best.threshold ? left : right).push_back(r);
    for (auto r : col.rows) scratch_[r] = 0.0;

    const std::int32_t l = grow(left, depth + 1);
    const std::int32_t rgt = grow(right, depth + 1);
    auto& stored = nodes_[static_cast<std::size_t>(id)];
    stored.feature = best.feature;
    stored.threshold = best.threshold;
    stored.left = l;
    stored.right = rgt;
    return id;
  }

  Split find_split(const std::vector<std::uint32_t>& members, const std::array<std::size_t, 2>& counts) {
    ++current_stamp_;
    for (auto r : members) stamp_[r] = current_stamp_;
    const double parent = weighted_gini(counts[0], counts[1]);
    const double total = static_cast<double>(labels_.size());

    Split best;
    std::vector<std::pair<double, std::size_t>> values;  // (value, class)
    std::vector<std::pair<double, std::array<std::size_t, 2>>> groups;
    for (std::size_t f = 0; f < n_features_; ++f) {
      const auto& col = columns_[f];
      values.clear();
      std::array<std::size_t, 2> zeros = counts;
      for (std::size_t j = 0; j < col.rows.size(); ++j) {
        const auto r = col.rows[j];
        if (stamp_[r] != current_stamp_) continue;
        const std::size_t cls = class_index(labels_[r]);
        values.emplace_back(col.values[j], cls);
        --zeros[cls];
      }
      if (values.empty()) continue;
      std::sort(values.begin(), values.end());

      groups.clear();
      bool zero_placed = zeros[0] + zeros[1] == 0;
      for (const auto& [v, cls] : values) {
        if (!zero_placed && v > 0.0) {
          groups.push_back({0.0, zeros});
          zero_placed = true;
        }
        if (groups.empty() || groups.back().first != v) groups.push_back({v, {0, 0}});
        ++groups.back().second[cls];
      }
      if (!zero_placed) groups.push_back({0.0, zeros});

      std::array<std::size_t, 2> left{0, 0};
      for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
        left[0] += groups[g].second[0];
        left[1] += groups[g].second[1];
        const std::size_t r0 = counts[0] - left[0];
        const std::size_t r1 = counts[1] - left[1];
        const double gain =
            (parent - weighted_gini(left[0], left[1]) - weighted_gini(r0, r1)) / total;
        if (gain > best.gain + kGainEpsilon) {
          const double lo = groups[g].first;
          const double hi = groups[g + 1].first;
          double mid = lo + (hi - lo) / 2.0;
          if (!(mid >= lo && mid < hi)) mid = lo;
          best = {static_cast<std::int32_t>(f), mid, gain};
        }
      }
    }
    return best;
  }

  std::span<const Label> labels_;
  TreeParams params_;
  std::size_t n_features_;
  std::vector<Column> columns_;
  std::vector<std::uint64_t> stamp_;
  std::uint64_t current_stamp_ = 0;
  std::vector<double> scratch_;
  std::vector<TreeNode> nodes_;
};

double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 1e-15;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double gini_impurity(std::span<const std::size_t> class_counts) {
  double total = 0.0;
  for (auto c : class_counts) total += static_cast<double>(c);
  if (total == 0.0) throw Error(ErrorCode::EmptySet, "Gini impurity of an empty set");
  double sum_sq = 0.0;
  for (auto c : class_counts) {
    const double p = static_cast<double>(c) / total;
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    const auto& node = nodes_[static_cast<std::size_t>(id)];
    best = std::max(best, d);
    if (!node.is_leaf()) {
      stack.emplace_back(node.left, d + 1);
      stack.emplace_back(node.right, d + 1);
    }
  }
  return best;
}

const TreeNode& DecisionTree::leaf_for(const SparseVector& x) const {
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf()) {
    const double v = x.at(static_cast<std::size_t>(node->feature));
    node = &nodes_[static_cast<std::size_t>(v <= node->threshold ? node->left : node->right)];
  }
  return *node;
}

Label DecisionTree::predict(const SparseVector& x) const {
  const auto& leaf = leaf_for(x);
  return leaf.counts[1] > leaf.counts[0] ? Label::Troll : Label::NonTroll;
}

DecisionTree train_substitute(std::span<const SparseVector> rows, std::span<const Label> labels,
                              const TreeParams& params) {
  if (rows.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "rows and labels differ in length");
  }
  if (rows.empty()) throw Error(ErrorCode::Empty, "no rows");
  bool troll = false;
  bool non = false;
  for (auto l : labels) (l == Label::Troll ? troll : non) = true;
  if (!troll || !non) throw Error(ErrorCode::SingleClass, "substitute tree needs both classes");
  for (const auto& r : rows) {
    if (r.dim != rows.front().dim) throw Error(ErrorCode::DimensionMismatch, "rows differ in dimension");
  }
  TreeBuilder builder(rows, labels, params);
  auto nodes = builder.build();
  return DecisionTree(std::move(nodes), builder.n_features(), params);
}

std::vector<double> feature_importances(const DecisionTree& tree) {
  std::vector<double> importance(tree.n_features(), 0.0);
  const auto& nodes = tree.nodes();
  const double total = static_cast<double>(nodes.front().samples());
  for (const auto& node : nodes) {
    if (node.is_leaf()) continue;
    const auto& l = nodes[static_cast<std::size_t>(node.left)];
    const auto& r = nodes[static_cast<std::size_t>(node.right)];
    const double decrease = weighted_gini(node.counts[0], node.counts[1]) -
                            weighted_gini(l.counts[0], l.counts[1]) -
                            weighted_gini(r.counts[0], r.counts[1]);
    importance[static_cast<std::size_t>(node.feature)] += decrease / total;
  }
  double sum = 0.0;
  for (double v : importance) sum += v;
  if (sum > 0.0) {
    for (double& v : importance) v /= sum;
  }
  return importance;
}

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                                a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double dof) {
  if (std::isinf(t)) return 0.0;
  return regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t));
}

Correlation pearson_correlation(std::span<const std::uint8_t> presence,
                                std::span<const std::uint8_t> labels) {
  if (presence.size() != labels.size()) {
    throw Error(ErrorCode::InvalidArgument, "correlation vectors differ in length");
  }
  const std::size_t n = presence.size();
  if (n < 3) throw Error(ErrorCode::InvalidArgument, "correlation needs n >= 3");
  const auto& k = simd::active();
  const std::size_t nx = k.count_nonzero(presence.data(), n);
  const std::size_t ny = k.count_nonzero(labels.data(), n);
  if (nx == 0 || nx == n || ny == 0 || ny == n) {
    throw Error(ErrorCode::ConstantVector, "correlation undefined for a constant vector");
  }
  const std::size_t nxy = k.count_both(presence.data(), labels.data(), n);

  const double dn = static_cast<double>(n);
  const double sx = static_cast<double>(nx);
  const double sy = static_cast<double>(ny);
  const double num = dn * static_cast<double>(nxy) - sx * sy;
  const double den = std::sqrt(sx * (dn - sx)) * std::sqrt(sy * (dn - sy));
  Correlation out;
  out.r = std::clamp(num / den, -1.0, 1.0);
  const double dof = dn - 2.0;
  if (std::fabs(out.r) >= 1.0) {
    out.p = 0.0;
  } else {
    const double t = out.r * std::sqrt(dof / (1.0 - out.r * out.r));
    out.p = student_t_two_sided_p(t, dof);
  }
  return out;
}

SparseVector text_channels(const SparseVector& full, const FeatureSpace& space) {
  if (full.dim != space.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "vector does not belong to the feature space");
  }
  const std::size_t offset = space.text_offset();
  SparseVector out;
  out.dim = space.dimension() - offset;
  for (std::size_t i = 0; i < full.nnz(); ++i) {
    if (full.indices[i] < offset) continue;
    out.indices.push_back(static_cast<std::uint32_t>(full.indices[i] - offset));
    out.values.push_back(full.values[i]);
  }
  return out;
}

TargetWordList select_targets(const FeatureSpace& space, std::span<const double> importances,
                              std::span<const SparseVector> rows, std::span<const Label> labels,
                              std::size_t threads) {
  const std::size_t width = space.dimension() - space.text_offset();
  if (importances.size() != width) {
    throw Error(ErrorCode::DimensionMismatch, "importances do not cover the text and hashtag columns");
  }
  if (rows.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "rows and labels differ in length");
  }
  std::vector<std::uint8_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = labels[i] == Label::Troll ? 1 : 0;

  std::vector<std::size_t> candidates;
  for (std::size_t c = 0; c < width; ++c) {
    if (importances[c] > 0.0) candidates.push_back(c);
  }
  std::vector<std::vector<std::uint32_t>> present(width);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].dim != width) throw Error(ErrorCode::DimensionMismatch, "row is not text-channel width");
    for (auto idx : rows[r].indices) present[idx].push_back(static_cast<std::uint32_t>(r));
  }

  std::vector<std::optional<TargetWord>> found(candidates.size());
  parallel_for(candidates.size(), threads, [&](std::size_t i) {
    const std::size_t c = candidates[i];
    std::vector<std::uint8_t> x(rows.size(), 0);
    for (auto r : present[c]) x[r] = 1;
    Correlation corr;
    try {
      corr = pearson_correlation(x, y);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConstantVector) return;
      throw;
    }
    if (!(corr.r > 0.0 && corr.p < kTargetPValue)) return;
    const auto source = space.provenance(space.text_offset() + c);
    found[i] = TargetWord{source.name, source.channel, importances[c], corr.r, corr.p};
  });

  TargetWordList list;
  for (auto& entry : found) {
    if (entry) list.entries.push_back(std::move(*entry));
  }
  return list;
}

std::string TargetWordList::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "trollguard.targets";
  doc["version"] = kTargetsVersion;
  doc["provenance"] = nlohmann::ordered_json::parse(provenance);
  doc["targets"] = nlohmann::ordered_json::array();
  for (const auto& t : entries) {
    doc["targets"].push_back({{"token", t.token},
                              {"channel", std::string(to_string(t.channel))},
                              {"importance", t.importance},
                              {"r", t.r},
                              {"p", t.p}});
  }
  return doc.dump(2) + "\n";
}

TargetWordList TargetWordList::from_json(std::string_view text) {
  TargetWordList list;
  try {
    const auto doc = nlohmann::ordered_json::parse(text);
    const nlohmann::ordered_json* targets = &doc;
    if (doc.is_object()) {
      if (doc.value("version", kTargetsVersion) != kTargetsVersion) {
        throw Error(ErrorCode::VersionMismatch, "unsupported target list version");
      }
      targets = &doc.at("targets");
      if (doc.contains("provenance")) list.provenance = doc.at("provenance").dump();
    }
    for (const auto& t : *targets) {
      TargetWord w;
      w.token = t.at("token").get<std::string>();
      const std::string channel = t.value("channel", std::string("text"));
      if (channel == "text") {
        w.channel = Channel::Text;
      } else if (channel == "hashtag") {
        w.channel = Channel::Hashtag;
      } else {
        throw Error(ErrorCode::CorruptFile, "unknown target channel '" + channel + "'");
      }
      w.importance = t.value("importance", 0.0);
      w.r = t.value("r", 0.0);
      w.p = t.value("p", 1.0);
      list.entries.push_back(std::move(w));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("target list JSON: ") + e.what());
  }
  return list;
}

std::uint64_t TargetWordList::fingerprint() const {
  std::string canonical;
  for (const auto& t : entries) {
    canonical += to_string(t.channel);
    canonical += ':';
    canonical += t.token;
    canonical += '\n';
  }
  return fnv1a(canonical);
}

void save_targets(const TargetWordList& list, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write targets " + path.string());
  out << list.to_json();
}

TargetWordList load_targets(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open targets " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return TargetWordList::from_json(buffer.str());
}

}  // namespace trollguard
