#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "test_support.hpp"
#include "trollguard/features.hpp"
#include "trollguard/synthetic.hpp"
#include "trollguard/workflow.hpp"

using namespace trollguard;

TEST(Synthetic, ExactTrollCount) {
  for (const auto& cfg : {synthetic::BenchmarkConfig{2000, 0.03, 2020}, synthetic::BenchmarkConfig{333, 0.1, 1},
                          synthetic::BenchmarkConfig{10, 0.0, 5}, synthetic::BenchmarkConfig{7, 1.0, 5}}) {
    const auto corpus = synthetic::generate_benchmark(cfg);
    ASSERT_EQ(corpus.size(), cfg.size);
    std::size_t trolls = 0;
    std::set<std::string> ids;
    for (const auto& r : corpus) {
      ASSERT_TRUE(r.label.has_value());
      trolls += *r.label == Label::Troll;
      ids.insert(r.id);
      EXPECT_FALSE(r.text.empty());
    }
    EXPECT_EQ(trolls, static_cast<std::size_t>(std::llround(cfg.size * cfg.troll_rate)));
    EXPECT_EQ(ids.size(), corpus.size());
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  EXPECT_EQ(synthetic::generate_benchmark({300, 0.05, 4}), synthetic::generate_benchmark({300, 0.05, 4}));
  EXPECT_NE(synthetic::generate_benchmark({300, 0.05, 4}), synthetic::generate_benchmark({300, 0.05, 5}));
}

TEST(Synthetic, TrollsCarryTrollingSignals) {
  const auto corpus = synthetic::generate_benchmark({1000, 0.1, 3});
  const auto res = PipelineResources::defaults();
  std::size_t with_signal = 0, trolls = 0;
  for (const auto& r : corpus) {
    if (*r.label != Label::Troll) continue;
    ++trolls;
    const auto tweet = tokenize(r, res.stoplist);
    bool signal = false;
    for (auto bit : match_hashtag_categories(tweet.hashtag_tokens, res.rules)) signal |= bit != 0;
    for (auto bit : match_tropes(tweet.model_tokens, res.rules)) signal |= bit != 0;
    with_signal += signal;
  }
  EXPECT_EQ(with_signal, trolls);
}

TEST(Workflow, FitDetectorIsDeterministic) {
  const auto corpus = synthetic::generate_benchmark({400, 0.05, 6});
  const auto a = workflow::fit_detector(corpus, PipelineResources::defaults(), {}, 9, 1);
  const auto b = workflow::fit_detector(corpus, PipelineResources::defaults(), {}, 9, 3);
  EXPECT_EQ(a.model.weights, b.model.weights);
  EXPECT_EQ(a.model.bias, b.model.bias);
  EXPECT_EQ(a.synthetic_samples, 380u - 20u);
  EXPECT_EQ(a.model.feature_space_fingerprint, a.featurizer.space().fingerprint());

  workflow::DetectorOptions plain;
  plain.oversample = false;
  EXPECT_EQ(workflow::fit_detector(corpus, PipelineResources::defaults(), plain, 9).synthetic_samples, 0u);
}

TEST(Workflow, DeriveTargetsIsDeterministicAndFiltered) {
  const auto corpus = synthetic::generate_benchmark({400, 0.05, 6});
  const auto det = workflow::fit_detector(corpus, PipelineResources::defaults(), {}, 9);
  const auto a = workflow::derive_targets(det.featurizer, corpus, {}, 9, 1);
  const auto b = workflow::derive_targets(det.featurizer, corpus, {}, 9, 4);
  EXPECT_EQ(a.entries, b.entries);
  ASSERT_FALSE(a.entries.empty());
  const auto& space = det.featurizer.space();
  for (const auto& t : a.entries) {
    EXPECT_GT(t.importance, 0.0);
    EXPECT_GT(t.r, 0.0);
    EXPECT_LT(t.p, 0.05);
    EXPECT_TRUE(space.column_of({t.channel, t.token}).has_value()) << t.token;
  }
}

TEST(Workflow, ChainCoversEveryTweet) {
  const auto corpus = synthetic::generate_benchmark({50, 0.1, 2});
  const auto chain = workflow::chain_from_corpus(corpus);
  std::size_t tokens = 0;
  for (const auto& r : corpus) tokens += split_whitespace(r.text).size();
  EXPECT_EQ(chain.trained_tokens(), tokens);
}

TEST(Workflow, EvaluateDetectorReportsPerFoldMetrics) {
  const auto corpus = synthetic::generate_benchmark({300, 0.1, 6});
  const auto a = workflow::evaluate_detector(corpus, PipelineResources::defaults(), {}, 5, 2, 1);
  const auto b = workflow::evaluate_detector(corpus, PipelineResources::defaults(), {}, 5, 2, 3);
  EXPECT_EQ(a.folds.size(), 5u);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_GT(a.mean.accuracy, 0.9);
}
