#include "trollguard/vectorspace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_set>

#include "json.hpp"
#include "trollguard/error.hpp"
#include "trollguard/hashing.hpp"

namespace trollguard {
namespace {

constexpr int kFeatureSpaceVersion = 1;

nlohmann::ordered_json vocab_to_json(const Vocabulary& vocab) {
  nlohmann::ordered_json j;
  j["corpus_size"] = vocab.corpus_size();
  j["min_df_fraction"] = vocab.threshold().fraction;
  j["min_df_absolute"] = vocab.threshold().absolute;
  j["tokens"] = nlohmann::ordered_json::array();
  j["df"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    j["tokens"].push_back(vocab.token(i));
    j["df"].push_back(vocab.df(i));
  }
  return j;
}

Vocabulary vocab_from_json(const nlohmann::json& j) {
  DfThreshold threshold{j.at("min_df_fraction").get<double>(),
                        j.at("min_df_absolute").get<std::size_t>()};
  return Vocabulary(j.at("tokens").get<std::vector<std::string>>(),
                    j.at("df").get<std::vector<std::size_t>>(),
                    j.at("corpus_size").get<std::size_t>(), threshold);
}

}  // namespace

double SparseVector::norm() const noexcept {
  double sum = 0.0;
  for (double v : values) sum += v * v;
  return std::sqrt(sum);
}

double SparseVector::at(std::size_t index) const noexcept {
  const auto it = std::lower_bound(indices.begin(), indices.end(), index);
  if (it == indices.end() || *it != index) return 0.0;
  return values[static_cast<std::size_t>(it - indices.begin())];
}

std::vector<double> SparseVector::to_dense() const {
  std::vector<double> dense(dim, 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) dense[indices[i]] = values[i];
  return dense;
}

SparseVector SparseVector::from_dense(std::span<const double> dense) {
  SparseVector out;
  out.dim = dense.size();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.indices.push_back(static_cast<std::uint32_t>(i));
      out.values.push_back(dense[i]);
    }
  }
  return out;
}

void SparseVector::validate() const {
  if (indices.size() != values.size()) {
    throw Error(ErrorCode::InvalidArgument, "sparse vector index/value length differ");
  }
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] >= dim) throw Error(ErrorCode::InvalidArgument, "sparse index out of range");
    if (i > 0 && indices[i] <= indices[i - 1]) {
      throw Error(ErrorCode::InvalidArgument, "sparse indices not strictly increasing");
    }
    if (!std::isfinite(values[i]) || values[i] == 0.0) {
      throw Error(ErrorCode::InvalidArgument, "sparse value zero or non-finite");
    }
  }
}

std::size_t DfThreshold::min_count(std::size_t corpus_size) const noexcept {
  // The epsilon keeps exact products such as 0.01 * 200 from rounding up to 3.
  const double scaled = fraction * static_cast<double>(corpus_size);
  const auto by_fraction = static_cast<std::size_t>(std::ceil(scaled - 1e-9));
  return std::max(by_fraction, absolute);
}

double smooth_idf(std::size_t corpus_size, std::size_t df) noexcept {
  return std::log((1.0 + static_cast<double>(corpus_size)) / (1.0 + static_cast<double>(df))) + 1.0;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens, std::vector<std::size_t> df,
                       std::size_t corpus_size, DfThreshold threshold)
    : tokens_(std::move(tokens)), df_(std::move(df)), corpus_size_(corpus_size), threshold_(threshold) {
  if (tokens_.size() != df_.size()) {
    throw Error(ErrorCode::CorruptFile, "vocabulary token and df lists differ in length");
  }
  idf_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (i > 0 && !(tokens_[i - 1] < tokens_[i])) {
      throw Error(ErrorCode::CorruptFile, "vocabulary tokens not strictly sorted");
    }
    index_.emplace(tokens_[i], i);
    idf_.push_back(smooth_idf(corpus_size_, df_[i]));
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Vocabulary fit_vocabulary(std::span<const std::vector<std::string>> token_lists,
                          DfThreshold min_df) {
  if (token_lists.empty()) throw Error(ErrorCode::EmptyCorpus, "cannot fit a vocabulary on 0 documents");
  if (!(min_df.fraction >= 0.0 && min_df.fraction <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "min_df fraction must lie in [0,1]");
  }
  std::map<std::string, std::size_t> df;
  std::unordered_set<std::string_view> seen;
  for (const auto& doc : token_lists) {
    seen.clear();
    for (const auto& token : doc) {
      if (seen.insert(token).second) ++df[token];
    }
  }
  const std::size_t keep_at = min_df.min_count(token_lists.size());
  std::vector<std::string> tokens;
  std::vector<std::size_t> counts;
  for (const auto& [token, count] : df) {
    if (count >= keep_at) {
      tokens.push_back(token);
      counts.push_back(count);
    }
  }
  return Vocabulary(std::move(tokens), std::move(counts), token_lists.size(), min_df);
}

SparseVector tfidf_vector(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::map<std::uint32_t, double> counts;
  for (const auto& token : tokens) {
    if (auto column = vocab.index_of(token)) counts[static_cast<std::uint32_t>(*column)] += 1.0;
  }
  SparseVector out;
  out.dim = vocab.size();
  double sum_sq = 0.0;
  for (const auto& [column, tf] : counts) {
    const double w = tf * vocab.idf(column);
    out.indices.push_back(column);
    out.values.push_back(w);
    sum_sq += w * w;
  }
  if (sum_sq > 0.0) {
    const double inv = 1.0 / std::sqrt(sum_sq);
    for (double& v : out.values) v *= inv;
  }
  return out;
}

std::string_view to_string(Channel channel) noexcept {
  switch (channel) {
    case Channel::Engineered: return "engineered";
    case Channel::Text: return "text";
    case Channel::Hashtag: return "hashtag";
  }
  return "engineered";
}

FeatureSpace::FeatureSpace(std::vector<std::string> engineered_names, Vocabulary text,
                           Vocabulary hashtags)
    : engineered_names_(std::move(engineered_names)), text_(std::move(text)), hashtags_(std::move(hashtags)) {}

ColumnSource FeatureSpace::provenance(std::size_t column) const {
  if (column < text_offset()) return {Channel::Engineered, engineered_names_[column]};
  if (column < hashtag_offset()) return {Channel::Text, text_.token(column - text_offset())};
  if (column < dimension()) return {Channel::Hashtag, hashtags_.token(column - hashtag_offset())};
  throw Error(ErrorCode::DimensionMismatch, "column " + std::to_string(column) + " outside space");
}

std::optional<std::size_t> FeatureSpace::column_of(const ColumnSource& source) const {
  switch (source.channel) {
    case Channel::Engineered: {
      const auto it = std::find(engineered_names_.begin(), engineered_names_.end(), source.name);
      if (it == engineered_names_.end()) return std::nullopt;
      return static_cast<std::size_t>(it - engineered_names_.begin());
    }
    case Channel::Text:
      if (auto i = text_.index_of(source.name)) return *i + text_offset();
      return std::nullopt;
    case Channel::Hashtag:
      if (auto i = hashtags_.index_of(source.name)) return *i + hashtag_offset();
      return std::nullopt;
  }
  return std::nullopt;
}

std::string FeatureSpace::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "trollguard.feature_space";
  j["version"] = kFeatureSpaceVersion;
  j["engineered"] = engineered_names_;
  j["text"] = vocab_to_json(text_);
  j["hashtag"] = vocab_to_json(hashtags_);
  return j.dump();
}

std::uint64_t FeatureSpace::fingerprint() const { return fnv1a(to_json()); }

FeatureSpace FeatureSpace::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format").get<std::string>() != "trollguard.feature_space") {
      throw Error(ErrorCode::CorruptFile, "not a feature space file");
    }
    if (j.at("version").get<int>() != kFeatureSpaceVersion) {
      throw Error(ErrorCode::VersionMismatch,
                  "feature space version " + std::to_string(j.at("version").get<int>()));
    }
    return FeatureSpace(j.at("engineered").get<std::vector<std::string>>(),
                        vocab_from_json(j.at("text")), vocab_from_json(j.at("hashtag")));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("feature space JSON: ") + e.what());
  }
}

SparseVector assemble(const EngineeredFeatures& engineered, const SparseVector& text_vec,
                      const SparseVector& hash_vec, const FeatureSpace& space) {
  if (engineered.size() != space.engineered_size() || text_vec.dim != space.text_vocabulary().size() ||
      hash_vec.dim != space.hashtag_vocabulary().size()) {
    throw Error(ErrorCode::DimensionMismatch, "feature blocks do not match the feature space");
  }
  SparseVector out;
  out.dim = space.dimension();
  const auto dense = engineered.to_dense();
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i] != 0.0) {
      out.indices.push_back(static_cast<std::uint32_t>(i));
      out.values.push_back(dense[i]);
    }
  }
  auto append = [&](const SparseVector& block, std::size_t offset) {
    for (std::size_t i = 0; i < block.nnz(); ++i) {
      out.indices.push_back(static_cast<std::uint32_t>(block.indices[i] + offset));
      out.values.push_back(block.values[i]);
    }
  };
  append(text_vec, space.text_offset());
  append(hash_vec, space.hashtag_offset());
  return out;
}

}  // namespace trollguard
