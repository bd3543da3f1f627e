#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <functional>
#include <map>

#include "test_support.hpp"
#include "trollguard/detector.hpp"
#include "trollguard/error.hpp"
#include "trollguard/pipeline.hpp"

using namespace trollguard;

namespace {

struct Toy {
  std::vector<SparseVector> x;
  std::vector<Label> y;
};

// Twelve 2-D points; the last negative sits close to the positives.
Toy toy_set() {
  const double pts[12][2] = {{2, 1},  {1.5, 2},  {3, 2.5},    {2.5, 0.5}, {1, 3},     {2, 2},
                             {-1, -1}, {-2, 0.5}, {-1.5, -2}, {0, -1.5},  {-2.5, -1}, {0.5, 0.2}};
  Toy t;
  for (int i = 0; i < 12; ++i) {
    t.x.push_back(SparseVector::from_dense(std::vector<double>{pts[i][0], pts[i][1]}));
    t.y.push_back(i < 6 ? Label::Troll : Label::NonTroll);
  }
  return t;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "nothing thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(Svm, SeparatesLinearlySeparableData) {
  Toy t = toy_set();
  t.x.pop_back();
  t.y.pop_back();
  Hyperparams hp;
  hp.seed = 1;
  const auto model = train(t.x, t.y, hp);
  for (std::size_t i = 0; i < t.x.size(); ++i) EXPECT_EQ(classify(model, t.x[i]), t.y[i]) << i;
}

TEST(Svm, ReachesTheOptimumOfItsObjective) {
  // Reference optimum of 1/2 (|w|^2 + b^2) + C sum hinge on the toy set, C = 1,
  // from an off-the-shelf convex solver: 1.2085064935064938.
  const Toy t = toy_set();
  Hyperparams hp;
  hp.seed = 2;
  hp.epochs = 3000;
  hp.tolerance = 0.0;
  const auto model = train(t.x, t.y, hp);
  const double objective = hinge_objective(model, t.x, t.y, 1.0) + 0.5 * model.bias * model.bias;
  EXPECT_GE(objective, 1.2085064935064938 - 1e-9);
  EXPECT_LT(objective, 1.2085064935064938 * 1.02);
  EXPECT_NEAR(model.weights[0], 0.5649350649350651, 0.05);
  EXPECT_NEAR(model.weights[1], 0.34805194805194806, 0.05);
  EXPECT_NEAR(model.bias, -0.47792207792207786, 0.05);
}

TEST(Svm, TrainingLowersTheObjective) {
  const Toy t = toy_set();
  LinearModel zero;
  zero.weights.assign(2, 0.0);
  Hyperparams hp;
  hp.seed = 3;
  const auto model = train(t.x, t.y, hp);
  EXPECT_LT(hinge_objective(model, t.x, t.y, hp.c), hinge_objective(zero, t.x, t.y, hp.c));
  EXPECT_GE(model.epochs_run, 1u);
  EXPECT_LE(model.epochs_run, hp.epochs);
}

TEST(Svm, DecisionValueIsLinear) {
  const Toy t = toy_set();
  Hyperparams hp;
  hp.seed = 4;
  const auto model = train(t.x, t.y, hp);
  const auto& a = t.x[0];
  const auto& b = t.x[7];
  std::vector<double> mix(2);
  for (int i = 0; i < 2; ++i) mix[i] = 0.3 * a.at(i) + 0.7 * b.at(i);
  const double lhs = decision_value(model, SparseVector::from_dense(mix)) - model.bias;
  const double rhs = 0.3 * (decision_value(model, a) - model.bias) + 0.7 * (decision_value(model, b) - model.bias);
  EXPECT_NEAR(lhs, rhs, 1e-12);
  SparseVector empty;
  empty.dim = 2;
  EXPECT_DOUBLE_EQ(decision_value(model, empty), model.bias);
}

TEST(Svm, DeterministicUnderSeed) {
  const Toy t = toy_set();
  Hyperparams hp;
  hp.seed = 9;
  const auto a = train(t.x, t.y, hp);
  const auto b = train(t.x, t.y, hp);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_EQ(a.bias, b.bias);
}

TEST(Svm, Errors) {
  Toy t = toy_set();
  Hyperparams hp;
  EXPECT_EQ(code_of([&] { train(t.x, std::span(t.y).first(3), hp); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { train({}, {}, hp); }), ErrorCode::Empty);
  EXPECT_EQ(code_of([&] { train(std::span(t.x).first(6), std::span(t.y).first(6), hp); }), ErrorCode::SingleClass);
  auto bad = t.x;
  bad[3].dim = 3;
  EXPECT_EQ(code_of([&] { train(bad, t.y, hp); }), ErrorCode::DimensionMismatch);
  Hyperparams neg = hp;
  neg.c = -1;
  EXPECT_EQ(code_of([&] { train(t.x, t.y, neg); }), ErrorCode::InvalidArgument);
  const auto model = train(t.x, t.y, hp);
  EXPECT_EQ(code_of([&] { decision_value(model, bad[3]); }), ErrorCode::DimensionMismatch);
}

TEST(Metrics, HandComputedExample) {
  const auto m = metrics_from_confusion({5, 2, 3, 90});
  EXPECT_NEAR(m.precision, 5.0 / 7.0, 1e-15);
  EXPECT_NEAR(m.recall, 0.625, 1e-15);
  EXPECT_NEAR(m.accuracy, 0.95, 1e-15);
  EXPECT_NEAR(m.f1, 2 * (5.0 / 7.0) * 0.625 / (5.0 / 7.0 + 0.625), 1e-15);
}

TEST(Metrics, FromPredictionsAndDegenerateCases) {
  const std::vector<Label> truth = {Label::Troll, Label::Troll, Label::NonTroll, Label::NonTroll};
  const std::vector<Label> pred = {Label::Troll, Label::NonTroll, Label::Troll, Label::NonTroll};
  const auto m = compute_metrics(pred, truth);
  EXPECT_EQ(m.confusion, (Confusion{1, 1, 1, 1}));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
  const auto none = compute_metrics(std::vector<Label>(4, Label::NonTroll), truth);
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
  EXPECT_EQ(code_of([&] { compute_metrics(pred, std::span(truth).first(2)); }), ErrorCode::LengthMismatch);
  EXPECT_EQ(code_of([&] { compute_metrics({}, {}); }), ErrorCode::Empty);
}

TEST(KFold, StratifiedFoldsBalanceClasses) {
  std::vector<Label> labels(103, Label::NonTroll);
  for (std::size_t i = 0; i < 13; ++i) labels[i * 7] = Label::Troll;
  const auto folds = stratified_folds(labels, 10, 42);
  std::map<std::size_t, std::pair<int, int>> per;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ASSERT_LT(folds[i], 10u);
    (labels[i] == Label::Troll ? per[folds[i]].first : per[folds[i]].second)++;
  }
  int min_t = 1000, max_t = 0, min_all = 1000, max_all = 0;
  for (const auto& [f, c] : per) {
    min_t = std::min(min_t, c.first);
    max_t = std::max(max_t, c.first);
    min_all = std::min(min_all, c.first + c.second);
    max_all = std::max(max_all, c.first + c.second);
  }
  EXPECT_LE(max_t - min_t, 1);
  EXPECT_LE(max_all - min_all, 1);
  EXPECT_EQ(folds, stratified_folds(labels, 10, 42));
  EXPECT_THROW(stratified_folds(labels, 1, 0), Error);
}

TEST(KFold, ConfusionCoversEverySampleOnceAndThreadsDoNotMatter) {
  Toy t = toy_set();
  for (int r = 0; r < 3; ++r) {
    for (std::size_t i = 0; i < 12; ++i) {
      auto v = t.x[i].to_dense();
      v[0] += 0.01 * (r + 1);
      t.x.push_back(SparseVector::from_dense(v));
      t.y.push_back(t.y[i]);
    }
  }
  Hyperparams hp;
  hp.seed = 5;
  SmoteConfig smote;
  smote.seed = 6;
  const auto a = kfold_evaluate(t.x, t.y, 4, hp, smote, 1);
  const auto b = kfold_evaluate(t.x, t.y, 4, hp, smote, 4);
  EXPECT_EQ(a.mean.confusion.total(), t.x.size());
  EXPECT_EQ(a.folds.size(), 4u);
  EXPECT_EQ(a.mean, b.mean);
  double acc = 0;
  for (const auto& f : a.folds) acc += f.accuracy;
  EXPECT_NEAR(a.mean.accuracy, acc / 4, 1e-15);
  const auto plain = kfold_evaluate(t.x, t.y, 4, hp, std::nullopt, 2);
  EXPECT_EQ(plain.mean.confusion.total(), t.x.size());
}

TEST(ModelFile, RoundTripIsBitExact) {
  const Toy t = toy_set();
  Hyperparams hp;
  hp.seed = 7;
  auto model = train(t.x, t.y, hp, 0xfeedbeefULL);
  model.provenance = R"({"z":1,"a":{"k":[1,2]}})";
  tgtest::TempDir dir("model");
  save_model(model, dir / "m.bin");
  const auto back = load_model(dir / "m.bin");
  EXPECT_EQ(back.weights, model.weights);
  EXPECT_EQ(std::bit_cast<std::uint64_t>(back.bias), std::bit_cast<std::uint64_t>(model.bias));
  EXPECT_EQ(back.hyperparams, model.hyperparams);
  EXPECT_EQ(back.feature_space_fingerprint, 0xfeedbeefULL);
  EXPECT_EQ(back.epochs_run, model.epochs_run);
  EXPECT_EQ(back.provenance, model.provenance);
  for (const auto& x : t.x) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(decision_value(back, x)),
              std::bit_cast<std::uint64_t>(decision_value(model, x)));
  }
  EXPECT_EQ(serialize_model(back), serialize_model(model));
}

TEST(ModelFile, CorruptionIsDetected) {
  const Toy t = toy_set();
  const auto model = train(t.x, t.y, Hyperparams{});
  const std::string bytes = serialize_model(model);
  EXPECT_EQ(code_of([&] { deserialize_model(bytes.substr(0, bytes.size() - 3)); }), ErrorCode::CorruptFile);
  std::string flipped = bytes;
  flipped[flipped.size() - 12] ^= 0x40;
  EXPECT_EQ(code_of([&] { deserialize_model(flipped); }), ErrorCode::CorruptFile);
  std::string versioned = bytes;
  versioned[8] = 9;
  EXPECT_EQ(code_of([&] { deserialize_model(versioned); }), ErrorCode::VersionMismatch);
  EXPECT_EQ(code_of([&] { deserialize_model("nonsense"); }), ErrorCode::CorruptFile);
  EXPECT_EQ(code_of([&] { load_model("/nonexistent/model.bin"); }), ErrorCode::Io);
}

TEST(ModelFile, FingerprintGuard) {
  const auto corpus = std::vector<TweetRecord>{
      {"1", "a b c", TweetKind::Original, {}, Label::Troll}, {"2", "b c d", TweetKind::Original, {}, Label::NonTroll}};
  const auto fz = Featurizer::fit(corpus, PipelineResources::defaults(), SpaceConfig{});
  LinearModel model;
  model.weights.assign(fz.space().dimension(), 0.0);
  model.feature_space_fingerprint = fz.space().fingerprint();
  EXPECT_NO_THROW(require_compatible(model, fz.space()));
  model.feature_space_fingerprint ^= 1;
  EXPECT_EQ(code_of([&] { require_compatible(model, fz.space()); }), ErrorCode::FingerprintMismatch);
}
