#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "trollguard/corpus.hpp"
#include "trollguard/features.hpp"
#include "trollguard/vectorspace.hpp"

namespace trollguard {

/// Everything besides the fitted vocabularies that turns a tweet into a vector.
struct PipelineResources {
  Stoplist stoplist;
  RuleSet rules;
  SentimentLexicon lexicon;

  /// The copies shipped in data/.
  static PipelineResources defaults();
  /// Any path left empty falls back to the shipped default.
  static PipelineResources load(const std::optional<std::filesystem::path>& stoplist,
                                const std::optional<std::filesystem::path>& rules,
                                const std::optional<std::filesystem::path>& lexicon,
                                const std::optional<std::filesystem::path>& negators);

  std::uint64_t fingerprint() const;
};

struct SpaceConfig {
  DfThreshold text = DfThreshold::of_fraction(0.01);
  DfThreshold hashtag = DfThreshold::of_count(2);
};

/// tokenize -> engineer -> tf-idf -> assemble, in a fixed feature space.
class Featurizer {
 public:
  Featurizer(PipelineResources resources, FeatureSpace space)
      : resources_(std::move(resources)), space_(std::move(space)) {}

  static Featurizer fit(std::span<const TweetRecord> corpus, PipelineResources resources,
                        const SpaceConfig& config, std::size_t threads = 1);

  SparseVector vectorize(const TweetRecord& record) const;
  SparseVector vectorize(const TokenizedTweet& tweet) const;
  std::vector<SparseVector> vectorize_all(std::span<const TweetRecord> records,
                                          std::size_t threads = 1) const;

  const FeatureSpace& space() const noexcept { return space_; }
  const PipelineResources& resources() const noexcept { return resources_; }

 private:
  PipelineResources resources_;
  FeatureSpace space_;
};

/// Throws InvalidArgument naming the first unlabelled record.
std::vector<Label> labels_of(std::span<const TweetRecord> records);

}  // namespace trollguard
