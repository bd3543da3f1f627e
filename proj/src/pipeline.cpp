#include "trollguard/pipeline.hpp"

#include <algorithm>
#include <map>

#include "trollguard/error.hpp"
#include "trollguard/hashing.hpp"
#include "trollguard/parallel.hpp"
#include "trollguard/resources.hpp"

namespace trollguard {

PipelineResources PipelineResources::defaults() {
  return {parse_stoplist(resources::default_stoplist()),
          parse_rules(resources::default_rules_json()),
          parse_lexicon(resources::default_lexicon(), resources::default_negators())};
}

PipelineResources PipelineResources::load(const std::optional<std::filesystem::path>& stoplist,
                                          const std::optional<std::filesystem::path>& rules,
                                          const std::optional<std::filesystem::path>& lexicon,
                                          const std::optional<std::filesystem::path>& negators) {
  PipelineResources out = defaults();
  if (stoplist) out.stoplist = load_stoplist(*stoplist);
  if (rules) out.rules = load_rules(*rules);
  if (lexicon || negators) {
    const std::string lex_text =
        lexicon ? read_text_file(*lexicon) : std::string(resources::default_lexicon());
    const std::string neg_text =
        negators ? read_text_file(*negators) : std::string(resources::default_negators());
    out.lexicon = parse_lexicon(lex_text, neg_text);
  }
  return out;
}

std::uint64_t PipelineResources::fingerprint() const {
  std::vector<std::string> stop(stoplist.begin(), stoplist.end());
  std::sort(stop.begin(), stop.end());
  std::map<std::string, double> lex(lexicon.valence.begin(), lexicon.valence.end());
  std::vector<std::string> neg(lexicon.negators.begin(), lexicon.negators.end());
  std::sort(neg.begin(), neg.end());

  std::uint64_t h = fnv1a(rules_to_json(rules));
  for (const auto& s : stop) h = fnv1a(s + "\n", h);
  h = fnv1a("\x1d", h);
  for (const auto& [token, v] : lex) h = fnv1a(token + "\t" + std::to_string(v) + "\n", h);
  h = fnv1a("\x1d", h);
  for (const auto& s : neg) h = fnv1a(s + "\n", h);
  return h;
}

Featurizer Featurizer::fit(std::span<const TweetRecord> corpus, PipelineResources resources,
                           const SpaceConfig& config, std::size_t threads) {
  std::vector<TokenizedTweet> tokenized(corpus.size());
  parallel_for(corpus.size(), threads,
               [&](std::size_t i) { tokenized[i] = tokenize(corpus[i], resources.stoplist); });
  std::vector<std::vector<std::string>> text;
  std::vector<std::vector<std::string>> tags;
  text.reserve(corpus.size());
  tags.reserve(corpus.size());
  for (auto& t : tokenized) {
    text.push_back(std::move(t.model_tokens));
    tags.push_back(std::move(t.hashtag_tokens));
  }
  FeatureSpace space(engineered_feature_names(resources.rules), fit_vocabulary(text, config.text),
                     fit_vocabulary(tags, config.hashtag));
  return Featurizer(std::move(resources), std::move(space));
}

SparseVector Featurizer::vectorize(const TokenizedTweet& tweet) const {
  return assemble(engineer(tweet, resources_.rules, resources_.lexicon),
                  tfidf_vector(tweet.model_tokens, space_.text_vocabulary()),
                  tfidf_vector(tweet.hashtag_tokens, space_.hashtag_vocabulary()), space_);
}

SparseVector Featurizer::vectorize(const TweetRecord& record) const {
  return vectorize(tokenize(record, resources_.stoplist));
}

std::vector<SparseVector> Featurizer::vectorize_all(std::span<const TweetRecord> records,
                                                    std::size_t threads) const {
  std::vector<SparseVector> out(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) { out[i] = vectorize(records[i]); });
  return out;
}

std::vector<Label> labels_of(std::span<const TweetRecord> records) {
  std::vector<Label> labels;
  labels.reserve(records.size());
  for (const auto& r : records) {
    if (!r.label) throw Error(ErrorCode::InvalidArgument, "record '" + r.id + "' has no label");
    labels.push_back(*r.label);
  }
  return labels;
}

}  // namespace trollguard
