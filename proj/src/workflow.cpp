#include "trollguard/workflow.hpp"

#include "trollguard/random.hpp"

namespace trollguard::workflow {
namespace {

std::vector<SparseVector> minority_rows(std::span<const SparseVector> rows, std::span<const Label> labels) {
  std::vector<SparseVector> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (labels[i] == Label::Troll) out.push_back(rows[i]);
  }
  return out;
}

// Appends SMOTE samples for the Troll class; returns how many were added.
std::size_t oversample(std::vector<SparseVector>& rows, std::vector<Label>& labels, SmoteConfig cfg) {
  const auto minority = minority_rows(rows, labels);
  const std::size_t majority = rows.size() - minority.size();
  if (minority.empty() || minority.size() >= majority) return 0;
  auto synthetic = smote_oversample(minority, majority, cfg);
  for (auto& s : synthetic) {
    rows.push_back(std::move(s));
    labels.push_back(Label::Troll);
  }
  return synthetic.size();
}

}  // namespace

TrainedDetector fit_detector(std::span<const TweetRecord> corpus, PipelineResources resources,
                             const DetectorOptions& options, std::uint64_t seed, std::size_t threads) {
  auto featurizer = Featurizer::fit(corpus, std::move(resources), options.space, threads);
  auto rows = featurizer.vectorize_all(corpus, threads);
  auto labels = labels_of(corpus);

  std::size_t added = 0;
  if (options.oversample) {
    SmoteConfig cfg = options.smote;
    cfg.seed = derive_seed(seed, "smote");
    added = oversample(rows, labels, cfg);
  }
  Hyperparams hp = options.svm;
  hp.seed = derive_seed(seed, "svm");
  auto model = train(rows, labels, hp, featurizer.space().fingerprint());
  return {std::move(featurizer), std::move(model), added};
}

KFoldResult evaluate_detector(std::span<const TweetRecord> corpus, PipelineResources resources,
                              const DetectorOptions& options, std::size_t folds, std::uint64_t seed,
                              std::size_t threads) {
  const auto featurizer = Featurizer::fit(corpus, std::move(resources), options.space, threads);
  const auto rows = featurizer.vectorize_all(corpus, threads);
  const auto labels = labels_of(corpus);
  Hyperparams hp = options.svm;
  hp.seed = derive_seed(seed, "kfold-svm");
  std::optional<SmoteConfig> smote;
  if (options.oversample) {
    smote = options.smote;
    smote->seed = derive_seed(seed, "kfold-smote");
  }
  return kfold_evaluate(rows, labels, folds, hp, smote, threads);
}

TargetWordList derive_targets(const Featurizer& featurizer, std::span<const TweetRecord> corpus,
                              const SubstituteOptions& options, std::uint64_t seed, std::size_t threads) {
  const auto full = featurizer.vectorize_all(corpus, threads);
  const auto labels = labels_of(corpus);
  std::vector<SparseVector> rows;
  rows.reserve(full.size());
  for (const auto& x : full) rows.push_back(text_channels(x, featurizer.space()));

  auto train_rows = rows;
  auto train_labels = labels;
  if (options.oversample) {
    SmoteConfig cfg;
    cfg.k_neighbors = options.k_neighbors;
    cfg.seed = derive_seed(seed, "substitute-smote");
    oversample(train_rows, train_labels, cfg);
  }
  const auto tree = train_substitute(train_rows, train_labels, options.tree);
  const auto importances = feature_importances(tree);
  // Correlations are measured on the real tweets only.
  return select_targets(featurizer.space(), importances, rows, labels, threads);
}

MarkovChain chain_from_corpus(std::span<const TweetRecord> corpus) {
  MarkovChain chain;
  for (const auto& record : corpus) chain.add_stream(split_whitespace(record.text));
  return chain;
}

}  // namespace trollguard::workflow
