#include "trollguard/features.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "trollguard/error.hpp"

namespace trollguard {
namespace {

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, std::string("cannot open ") + what + " " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

bool token_matches(std::string_view token, std::string_view pattern) noexcept {
  if (!pattern.empty() && pattern.back() == '*') {
    pattern.remove_suffix(1);
    return token.starts_with(pattern);
  }
  return token == pattern;
}

void check_pattern(std::string_view rule, std::string_view pattern) {
  std::string_view body = pattern;
  if (!body.empty() && body.back() == '*') body.remove_suffix(1);
  if (body.empty() || to_lower_ascii(body) != body) {
    throw Error(ErrorCode::InvalidArgument,
                "rule '" + std::string(rule) + "' has invalid pattern '" + std::string(pattern) + "'");
  }
}

}  // namespace

void RuleSet::validate() const {
  std::set<std::string> names;
  for (const auto& cat : hashtag_categories) {
    if (!names.insert("hashtag:" + cat.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate hashtag category '" + cat.name + "'");
    }
    if (cat.patterns.empty()) {
      throw Error(ErrorCode::InvalidArgument, "category '" + cat.name + "' has no patterns");
    }
    for (const auto& p : cat.patterns) {
      if (p.empty() || to_lower_ascii(p) != p || p.find('*') != std::string::npos) {
        throw Error(ErrorCode::InvalidArgument,
                    "category '" + cat.name + "' has invalid pattern '" + p + "'");
      }
    }
  }
  for (const auto& trope : tropes) {
    if (!names.insert("trope:" + trope.name).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate trope '" + trope.name + "'");
    }
    if (trope.groups.empty()) {
      throw Error(ErrorCode::InvalidArgument, "trope '" + trope.name + "' has no groups");
    }
    for (const auto& group : trope.groups) {
      if (group.empty()) {
        throw Error(ErrorCode::InvalidArgument, "trope '" + trope.name + "' has an empty group");
      }
      for (const auto& p : group) check_pattern(trope.name, p);
    }
  }
}

RuleSet parse_rules(std::string_view json_text) {
  using nlohmann::json;
  RuleSet rules;
  try {
    const json doc = json::parse(json_text);
    for (const auto& cat : doc.at("hashtag_categories")) {
      rules.hashtag_categories.push_back(
          {cat.at("name").get<std::string>(), cat.at("patterns").get<std::vector<std::string>>()});
    }
    for (const auto& trope : doc.at("tropes")) {
      rules.tropes.push_back({trope.at("name").get<std::string>(),
                              trope.at("groups").get<std::vector<std::vector<std::string>>>()});
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("rules JSON: ") + e.what());
  }
  rules.validate();
  return rules;
}

RuleSet load_rules(const std::filesystem::path& path) {
  return parse_rules(read_file(path, "rules"));
}

std::string rules_to_json(const RuleSet& rules) {
  nlohmann::ordered_json doc;
  doc["hashtag_categories"] = nlohmann::ordered_json::array();
  for (const auto& cat : rules.hashtag_categories) {
    doc["hashtag_categories"].push_back({{"name", cat.name}, {"patterns", cat.patterns}});
  }
  doc["tropes"] = nlohmann::ordered_json::array();
  for (const auto& trope : rules.tropes) {
    doc["tropes"].push_back({{"name", trope.name}, {"groups", trope.groups}});
  }
  return doc.dump();
}

SentimentLexicon parse_lexicon(std::string_view lexicon_text, std::string_view negators_text) {
  SentimentLexicon lexicon;
  std::istringstream in{std::string(lexicon_text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw MalformedRowError(line_no, "lexicon line lacks a tab");
    const std::string token = to_lower_ascii(line.substr(0, tab));
    double valence = 0.0;
    try {
      std::size_t used = 0;
      valence = std::stod(line.substr(tab + 1), &used);
      if (tab + 1 + used != line.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw MalformedRowError(line_no, "bad valence for '" + token + "'");
    }
    if (!std::isfinite(valence)) throw MalformedRowError(line_no, "non-finite valence");
    lexicon.valence[token] = valence;
  }
  for (const auto& neg : parse_stoplist(negators_text)) lexicon.negators.insert(neg);
  return lexicon;
}

SentimentLexicon load_lexicon(const std::filesystem::path& lexicon_path,
                              const std::filesystem::path& negators_path) {
  return parse_lexicon(read_file(lexicon_path, "lexicon"), read_file(negators_path, "negators"));
}

std::vector<double> EngineeredFeatures::to_dense() const {
  std::vector<double> out;
  out.reserve(size());
  for (auto f : hashtag_flags) out.push_back(f);
  for (auto f : trope_flags) out.push_back(f);
  out.push_back(sentiment);
  for (auto f : kind_onehot) out.push_back(f);
  out.push_back(cap_ratio);
  return out;
}

std::vector<std::string> engineered_feature_names(const RuleSet& rules) {
  std::vector<std::string> names;
  for (const auto& cat : rules.hashtag_categories) names.push_back("hashtag:" + cat.name);
  for (const auto& trope : rules.tropes) names.push_back("trope:" + trope.name);
  names.emplace_back("sentiment");
  for (auto kind : {TweetKind::Original, TweetKind::Retweet, TweetKind::Reply}) {
    names.push_back("kind:" + std::string(to_string(kind)));
  }
  names.emplace_back("cap_ratio");
  return names;
}

std::vector<std::uint8_t> match_hashtag_categories(std::span<const std::string> hashtag_tokens,
                                                   const RuleSet& rules) {
  std::vector<std::uint8_t> flags(rules.hashtag_categories.size(), 0);
  for (std::size_t i = 0; i < flags.size(); ++i) {
    for (const auto& tag : hashtag_tokens) {
      for (const auto& pattern : rules.hashtag_categories[i].patterns) {
        if (tag.find(pattern) != std::string::npos) {
          flags[i] = 1;
          break;
        }
      }
      if (flags[i]) break;
    }
  }
  return flags;
}

std::vector<std::uint8_t> match_tropes(std::span<const std::string> model_tokens,
                                       const RuleSet& rules) {
  std::vector<std::uint8_t> flags(rules.tropes.size(), 0);
  for (std::size_t j = 0; j < flags.size(); ++j) {
    bool all_groups = true;
    for (const auto& group : rules.tropes[j].groups) {
      bool group_hit = false;
      for (const auto& token : model_tokens) {
        for (const auto& pattern : group) {
          if (token_matches(token, pattern)) {
            group_hit = true;
            break;
          }
        }
        if (group_hit) break;
      }
      if (!group_hit) {
        all_groups = false;
        break;
      }
    }
    flags[j] = all_groups ? 1 : 0;
  }
  return flags;
}

double sentiment_score(std::span<const std::string> model_tokens, const SentimentLexicon& lexicon) {
  double sum = 0.0;
  for (std::size_t i = 0; i < model_tokens.size(); ++i) {
    const auto it = lexicon.valence.find(model_tokens[i]);
    if (it == lexicon.valence.end()) continue;
    double valence = it->second;
    const std::size_t from = i >= kNegationWindow ? i - kNegationWindow : 0;
    for (std::size_t k = from; k < i; ++k) {
      if (lexicon.negators.contains(model_tokens[k])) {
        valence = -valence;
        break;
      }
    }
    sum += valence;
  }
  if (sum == 0.0) return 0.0;
  return sum / std::sqrt(sum * sum + kSentimentAlpha);
}

EngineeredFeatures engineer(const TokenizedTweet& tweet, const RuleSet& rules,
                            const SentimentLexicon& lexicon) {
  EngineeredFeatures out;
  out.hashtag_flags = match_hashtag_categories(tweet.hashtag_tokens, rules);
  out.trope_flags = match_tropes(tweet.model_tokens, rules);
  out.sentiment = sentiment_score(tweet.model_tokens, lexicon);
  out.kind_onehot[static_cast<std::size_t>(tweet.kind)] = 1;
  out.cap_ratio = tweet.cap_ratio;
  return out;
}

}  // namespace trollguard
