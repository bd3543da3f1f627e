#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "trollguard/atd.hpp"
#include "trollguard/balance.hpp"
#include "trollguard/detector.hpp"
#include "trollguard/pipeline.hpp"
#include "trollguard/targets.hpp"

// End-to-end stages shared by the CLI and the acceptance suite. Every stage
// derives its own seeds from one root seed by label.
namespace trollguard::workflow {

struct DetectorOptions {
  SpaceConfig space;
  Hyperparams svm;           // svm.seed is ignored; derived from the root seed
  SmoteConfig smote;         // smote.seed is ignored; derived from the root seed
  bool oversample = true;
};

struct TrainedDetector {
  Featurizer featurizer;
  LinearModel model;
  std::size_t synthetic_samples = 0;
};

/// Fits the feature space on the corpus, balances with SMOTE and trains the SVM.
TrainedDetector fit_detector(std::span<const TweetRecord> corpus, PipelineResources resources,
                             const DetectorOptions& options, std::uint64_t seed,
                             std::size_t threads = 1);

/// Stratified k-fold over vectors in a space fitted on the full corpus.
KFoldResult evaluate_detector(std::span<const TweetRecord> corpus, PipelineResources resources,
                              const DetectorOptions& options, std::size_t folds, std::uint64_t seed,
                              std::size_t threads = 1);

struct SubstituteOptions {
  TreeParams tree;
  bool oversample = true;    // balance the substitute's training rows like the detector's
  std::size_t k_neighbors = 5;
};

/// Trains the text-only substitute tree and keeps the important, positively and
/// significantly troll-correlated columns.
TargetWordList derive_targets(const Featurizer& featurizer, std::span<const TweetRecord> corpus,
                              const SubstituteOptions& options, std::uint64_t seed,
                              std::size_t threads = 1);

/// Chain over the verbatim whitespace streams of every tweet text.
MarkovChain chain_from_corpus(std::span<const TweetRecord> corpus);

}  // namespace trollguard::workflow
