#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "trollguard/corpus.hpp"

namespace trollguard {

struct HashtagCategory {
  std::string name;
  std::vector<std::string> patterns;  // substrings of a lowercase hashtag
};

/// A trope fires when every group has at least one matching token. A pattern
/// ending in '*' is a stem and matches by prefix; otherwise the token must be equal.
struct TropeRule {
  std::string name;
  std::vector<std::vector<std::string>> groups;
};

struct RuleSet {
  std::vector<HashtagCategory> hashtag_categories;
  std::vector<TropeRule> tropes;

  /// Throws InvalidArgument on duplicate names or empty/uppercase patterns.
  void validate() const;
};

RuleSet parse_rules(std::string_view json_text);
RuleSet load_rules(const std::filesystem::path& path);
std::string rules_to_json(const RuleSet& rules);

struct SentimentLexicon {
  std::unordered_map<std::string, double> valence;
  std::unordered_set<std::string> negators;
};

/// lexicon_text: "token<TAB>valence" lines; negators_text: one token per line.
SentimentLexicon parse_lexicon(std::string_view lexicon_text, std::string_view negators_text);
SentimentLexicon load_lexicon(const std::filesystem::path& lexicon_path,
                              const std::filesystem::path& negators_path);

struct EngineeredFeatures {
  std::vector<std::uint8_t> hashtag_flags;
  std::vector<std::uint8_t> trope_flags;
  double sentiment = 0.0;
  std::array<std::uint8_t, 3> kind_onehot{};
  double cap_ratio = 0.0;

  std::size_t size() const noexcept { return hashtag_flags.size() + trope_flags.size() + 5; }
  /// [hashtag_flags | trope_flags | sentiment | kind_onehot | cap_ratio]
  std::vector<double> to_dense() const;
};

/// Column names of the engineered block, in to_dense() order.
std::vector<std::string> engineered_feature_names(const RuleSet& rules);

std::vector<std::uint8_t> match_hashtag_categories(std::span<const std::string> hashtag_tokens,
                                                   const RuleSet& rules);
std::vector<std::uint8_t> match_tropes(std::span<const std::string> model_tokens,
                                       const RuleSet& rules);

/// Sentiment negation looks back this many tokens.
inline constexpr std::size_t kNegationWindow = 3;
/// Normalisation constant in s / sqrt(s^2 + alpha).
inline constexpr double kSentimentAlpha = 15.0;

double sentiment_score(std::span<const std::string> model_tokens, const SentimentLexicon& lexicon);

EngineeredFeatures engineer(const TokenizedTweet& tweet, const RuleSet& rules,
                            const SentimentLexicon& lexicon);

}  // namespace trollguard
