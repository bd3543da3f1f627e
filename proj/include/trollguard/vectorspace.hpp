#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trollguard/features.hpp"

namespace trollguard {

/// Sorted-index sparse vector. Indices strictly increase and stay below dim;
/// stored values are finite and nonzero.
struct SparseVector {
  std::vector<std::uint32_t> indices;
  std::vector<double> values;
  std::size_t dim = 0;

  std::size_t nnz() const noexcept { return indices.size(); }
  double norm() const noexcept;
  /// 0 when the index is not stored.
  double at(std::size_t index) const noexcept;
  std::vector<double> to_dense() const;
  static SparseVector from_dense(std::span<const double> dense);
  /// Throws InvalidArgument if an invariant is broken.
  void validate() const;

  friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

/// Minimum document frequency: a token is kept when
/// df >= max(ceil(fraction * N), absolute).
struct DfThreshold {
  double fraction = 0.0;
  std::size_t absolute = 0;

  std::size_t min_count(std::size_t corpus_size) const noexcept;
  static DfThreshold of_fraction(double f) { return {f, 0}; }
  static DfThreshold of_count(std::size_t n) { return {0.0, n}; }
};

class Vocabulary {
 public:
  Vocabulary() = default;
  Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> df, std::size_t corpus_size,
             DfThreshold threshold);

  std::size_t size() const noexcept { return tokens_.size(); }
  std::size_t corpus_size() const noexcept { return corpus_size_; }
  const DfThreshold& threshold() const noexcept { return threshold_; }
  const std::string& token(std::size_t column) const { return tokens_.at(column); }
  std::size_t df(std::size_t column) const { return df_.at(column); }
  /// ln((1 + N) / (1 + df)) + 1
  double idf(std::size_t column) const { return idf_.at(column); }
  std::optional<std::size_t> index_of(std::string_view token) const;
  std::span<const std::string> tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::vector<std::size_t> df_;
  std::vector<double> idf_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t corpus_size_ = 0;
  DfThreshold threshold_;
};

double smooth_idf(std::size_t corpus_size, std::size_t df) noexcept;

/// Columns are the retained tokens in lexicographic order. Throws EmptyCorpus.
Vocabulary fit_vocabulary(std::span<const std::vector<std::string>> token_lists,
                          DfThreshold min_df);

/// Raw-count tf times smooth idf, then L2-normalised. OOV tokens are ignored.
SparseVector tfidf_vector(std::span<const std::string> tokens, const Vocabulary& vocab);

enum class Channel { Engineered, Text, Hashtag };
std::string_view to_string(Channel channel) noexcept;

struct ColumnSource {
  Channel channel;
  std::string name;

  friend bool operator==(const ColumnSource&, const ColumnSource&) = default;
};

/// Column layout [engineered | text tf-idf | hashtag tf-idf].
class FeatureSpace {
 public:
  FeatureSpace() = default;
  FeatureSpace(std::vector<std::string> engineered_names, Vocabulary text, Vocabulary hashtags);

  std::size_t engineered_size() const noexcept { return engineered_names_.size(); }
  std::size_t text_offset() const noexcept { return engineered_size(); }
  std::size_t hashtag_offset() const noexcept { return engineered_size() + text_.size(); }
  std::size_t dimension() const noexcept { return hashtag_offset() + hashtags_.size(); }

  const std::vector<std::string>& engineered_names() const noexcept { return engineered_names_; }
  const Vocabulary& text_vocabulary() const noexcept { return text_; }
  const Vocabulary& hashtag_vocabulary() const noexcept { return hashtags_; }

  ColumnSource provenance(std::size_t column) const;
  std::optional<std::size_t> column_of(const ColumnSource& source) const;

  /// FNV-1a over the canonical JSON form.
  std::uint64_t fingerprint() const;
  std::string to_json() const;
  static FeatureSpace from_json(std::string_view text);

 private:
  std::vector<std::string> engineered_names_;
  Vocabulary text_;
  Vocabulary hashtags_;
};

/// Throws DimensionMismatch when a block does not fit the space.
SparseVector assemble(const EngineeredFeatures& engineered, const SparseVector& text_vec,
                      const SparseVector& hash_vec, const FeatureSpace& space);

}  // namespace trollguard
