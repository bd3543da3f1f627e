#include <gtest/gtest.h>

#include <bit>
#include <map>
#include <set>

#include "test_support.hpp"
#include "trollguard/atd.hpp"
#include "trollguard/corpus.hpp"
#include "trollguard/error.hpp"

using namespace trollguard;
using tgtest::code_of;

namespace {

const std::string kLine1 = "‘Twas brillig, and the slithy toves";
const std::string kLine2 = "Did gyre and gimble in the wabe;";
const std::string kLine3 = "All mimsy were the borogoves,";
const std::string kLine4 = "And the mome raths outgrabe.";

MarkovChain stanza_chain() {
  const std::vector<std::vector<std::string>> streams = {split_whitespace(kLine1 + " " + kLine2)};
  return MarkovChain::build(streams);
}

TargetWordList word_targets(std::initializer_list<const char*> words) {
  TargetWordList list;
  for (const char* w : words) list.entries.push_back({w, Channel::Text, 1.0, 0.5, 0.01});
  return list;
}

}  // namespace

TEST(MarkovChain, ReproducesTheStanzaTable) {
  const auto chain = stanza_chain();
  struct Row {
    const char* from;
    const char* to;
    double p;
  };
  const Row table[] = {{"‘Twas", "brillig,", 1.0}, {"brillig,", "and", 1.0}, {"and", "the", 0.5},
                       {"the", "slithy", 0.5},          {"slithy", "toves", 1.0},   {"toves", "Did", 1.0},
                       {"Did", "gyre", 1.0},            {"gyre", "and", 1.0},       {"and", "gimble", 0.5},
                       {"gimble", "in", 1.0},           {"in", "the", 1.0},         {"the", "wabe;", 0.5}};
  for (const auto& row : table) {
    EXPECT_NEAR(chain.probability(row.from, row.to), row.p, 1e-12) << row.from << " -> " << row.to;
  }
  EXPECT_EQ(chain.pair_count(), 12u);
  EXPECT_EQ(chain.state_count(), 10u);
  EXPECT_FALSE(chain.has_state("wabe;"));
  EXPECT_FALSE(chain.has_state("wabe"));
  EXPECT_EQ(chain.probability("the", "toves"), 0.0);
  EXPECT_EQ(chain.trained_tokens(), 13u);

  const auto row = chain.transitions("the");
  ASSERT_EQ(row.size(), 2u);
  EXPECT_EQ(row[0].next, "slithy");
  EXPECT_EQ(row[1].next, "wabe;");
  EXPECT_EQ(row[0].count, 1u);
  EXPECT_TRUE(chain.transitions("nowhere").empty());
}

TEST(MarkovChain, RowsSumToOne) {
  const auto chain = MarkovChain::build(std::vector<std::vector<std::string>>{
      split_whitespace("a b a c a b b a"), split_whitespace("c a c"), split_whitespace("b")});
  for (const char* state : {"a", "b", "c"}) {
    double sum = 0.0;
    for (const auto& t : chain.transitions(state)) sum += t.probability;
    EXPECT_NEAR(sum, 1.0, 1e-12) << state;
  }
  EXPECT_NEAR(chain.probability("a", "b"), 0.5, 1e-12);
  EXPECT_NEAR(chain.probability("a", "c"), 0.5, 1e-12);
}

TEST(MarkovChain, SamplingFollowsProbabilities) {
  const auto chain = MarkovChain::build(std::vector<std::vector<std::string>>{split_whitespace("x y x y x y x z")});
  Rng rng(3);
  std::map<std::string, int> seen;
  for (int i = 0; i < 20000; ++i) seen[*chain.sample("x", rng)]++;
  EXPECT_NEAR(seen["y"] / 20000.0, 0.75, 0.02);
  EXPECT_NEAR(seen["z"] / 20000.0, 0.25, 0.02);
  EXPECT_FALSE(chain.sample("q", rng).has_value());
}

TEST(MarkovChain, MergeAddsCounts) {
  auto a = MarkovChain::build(std::vector<std::vector<std::string>>{split_whitespace("p q")});
  const auto b = MarkovChain::build(std::vector<std::vector<std::string>>{split_whitespace("p r p q")});
  a.merge(b);
  const auto whole = MarkovChain::build(std::vector<std::vector<std::string>>{split_whitespace("p q"),
                                                                              split_whitespace("p r p q")});
  EXPECT_NEAR(a.probability("p", "q"), 2.0 / 3.0, 1e-12);
  EXPECT_EQ(a.to_json(), whole.to_json());
  EXPECT_EQ(a.fingerprint(), whole.fingerprint());
}

TEST(MarkovChain, JsonRoundTripIsBitExact) {
  const auto chain = MarkovChain::build(std::vector<std::vector<std::string>>{
      split_whitespace("one two three one three one two two one"), split_whitespace(kLine1 + " " + kLine2)});
  const auto back = MarkovChain::from_json(chain.to_json());
  EXPECT_EQ(back.state_count(), chain.state_count());
  EXPECT_EQ(back.pair_count(), chain.pair_count());
  EXPECT_EQ(back.trained_tokens(), chain.trained_tokens());
  EXPECT_EQ(back.fingerprint(), chain.fingerprint());
  for (const char* state : {"one", "two", "three", "the", "and"}) {
    const auto x = chain.transitions(state);
    const auto y = back.transitions(state);
    ASSERT_EQ(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      EXPECT_EQ(x[i].next, y[i].next);
      EXPECT_EQ(std::bit_cast<std::uint64_t>(x[i].probability), std::bit_cast<std::uint64_t>(y[i].probability));
    }
  }
  tgtest::TempDir dir("chain");
  save_chain(chain, dir / "c.json");
  EXPECT_EQ(load_chain(dir / "c.json").to_json(), chain.to_json());
}

TEST(MarkovChain, CorruptInputs) {
  EXPECT_EQ(code_of([] { MarkovChain::from_json("[1,2"); }), ErrorCode::CorruptFile);
  EXPECT_EQ(code_of([] { load_chain("/nonexistent/chain.json"); }), ErrorCode::Io);
}

TEST(TargetMatcher, TextAndHashtagRules) {
  TargetWordList list = word_targets({"fake", "mome"});
  list.entries.push_back({"chinavirus", Channel::Hashtag, 1.0, 0.5, 0.01});
  const TargetMatcher m(list);
  EXPECT_TRUE(m.matches("fake"));
  EXPECT_TRUE(m.matches("FAKE,"));
  EXPECT_TRUE(m.matches("\"Fake!\""));
  EXPECT_TRUE(m.matches("@fake"));
  EXPECT_FALSE(m.matches("fakes"));
  EXPECT_TRUE(m.matches("#ChinaVirus"));
  EXPECT_TRUE(m.matches("#chinavirus."));
  EXPECT_FALSE(m.matches("chinavirus"));  // hashtag targets need the '#'
  EXPECT_FALSE(m.matches("#fake"));       // text targets do not match hashtags
  EXPECT_FALSE(m.matches("https://fake.example/mome"));
  EXPECT_FALSE(TargetMatcher(TargetWordList{}).matches("fake"));
  EXPECT_TRUE(TargetMatcher(TargetWordList{}).empty());
}

TEST(Rewrite, StanzaReplacementsFollowTheChain) {
  const auto chain = stanza_chain();
  const TargetMatcher targets(word_targets({"borogoves", "mome"}));
  const auto stream = split_whitespace(kLine3 + " " + kLine4);
  const std::string variant_a = "All mimsy were the wabe, And the slithy raths outgrabe.";
  const std::string variant_b = "All mimsy were the slithy, And the slithy raths outgrabe.";

  std::map<std::string, int> first, second;
  std::set<std::string> outputs;
  const int runs = 1000;
  for (int seed = 0; seed < runs; ++seed) {
    const auto r = rewrite(stream, targets, chain, static_cast<std::uint64_t>(seed));
    ASSERT_EQ(r.trace.size(), 2u);
    for (const auto& e : r.trace) {
      ASSERT_EQ(e.action, EditAction::Replaced);
      ASSERT_EQ(e.preceding, "the");
      ASSERT_TRUE(e.sampled == "slithy" || e.sampled == "wabe;") << e.sampled;
    }
    EXPECT_EQ(r.trace[0].original, "borogoves,");
    EXPECT_EQ(r.trace[1].original, "mome");
    first[r.trace[0].sampled]++;
    second[r.trace[1].sampled]++;
    outputs.insert(join_tokens(r.tokens));
  }
  for (const auto* counts : {&first, &second}) {
    EXPECT_NEAR(counts->at("slithy") / double(runs), 0.5, 0.05);
    EXPECT_NEAR(counts->at("wabe;") / double(runs), 0.5, 0.05);
  }
  EXPECT_TRUE(outputs.count(variant_a));
  EXPECT_TRUE(outputs.count(variant_b));
  EXPECT_EQ(outputs.size(), 4u);
}

TEST(Rewrite, PunctuationMovesFromTheOriginal) {
  EXPECT_EQ(render_replacement("wabe;", "borogoves,"), "wabe,");
  EXPECT_EQ(render_replacement("wabe;", "mome"), "wabe");
  EXPECT_EQ(render_replacement("slithy", "borogoves,"), "slithy,");
  EXPECT_EQ(render_replacement("brillig,", "end!?"), "brillig!?");
}

TEST(Rewrite, RemovesWhenThereIsNoUsableState) {
  const auto chain = stanza_chain();
  const TargetMatcher targets(word_targets({"all", "raths"}));
  // "All" opens the stream and "mome" never appears as a chain state.
  const auto r = rewrite(split_whitespace("All mimsy the mome raths outgrabe."), targets, chain, 1);
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].action, EditAction::Removed);
  EXPECT_TRUE(r.trace[0].preceding.empty());
  EXPECT_EQ(r.trace[1].action, EditAction::Removed);
  EXPECT_EQ(r.trace[1].preceding, "mome");
  EXPECT_EQ(join_tokens(r.tokens), "mimsy the mome outgrabe.");
}

TEST(Rewrite, GivesUpAfterRedrawCapWhenEveryDrawIsATarget) {
  // Every successor of "the" is itself a target, so the token is removed.
  const auto chain = stanza_chain();
  const TargetMatcher targets(word_targets({"borogoves", "slithy", "wabe"}));
  const auto r = rewrite(split_whitespace(kLine3), targets, chain, 9);
  ASSERT_EQ(r.trace.size(), 1u);
  EXPECT_EQ(r.trace[0].action, EditAction::Removed);
  EXPECT_EQ(r.trace[0].preceding, "the");
  EXPECT_EQ(join_tokens(r.tokens), "All mimsy were the");
}

TEST(Rewrite, ConditionsOnTheRewrittenPrefix) {
  // After "x" is replaced by "y", the next target is conditioned on "y".
  const auto chain = MarkovChain::build(std::vector<std::vector<std::string>>{split_whitespace("a y y z")});
  const TargetMatcher targets(word_targets({"x", "w"}));
  const auto r = rewrite(split_whitespace("a x w"), targets, chain, 4);
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[0].sampled, "y");
  EXPECT_EQ(r.trace[1].preceding, "y");
}

TEST(Rewrite, DeterministicAndNoOpWithoutTargets) {
  const auto chain = stanza_chain();
  const TargetMatcher targets(word_targets({"borogoves", "mome"}));
  const auto stream = split_whitespace(kLine3 + " " + kLine4);
  const auto a = rewrite(stream, targets, chain, 77);
  const auto b = rewrite(stream, targets, chain, 77);
  EXPECT_EQ(a.tokens, b.tokens);
  EXPECT_EQ(a.trace, b.trace);
  const auto none = rewrite(stream, TargetMatcher(TargetWordList{}), chain, 77);
  EXPECT_EQ(none.tokens, stream);
  EXPECT_TRUE(none.trace.empty());
}
