#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trollguard/balance.hpp"
#include "trollguard/corpus.hpp"
#include "trollguard/vectorspace.hpp"

namespace trollguard {

struct Hyperparams {
  double c = 1.0;            // hinge-loss weight against the L2 penalty
  std::size_t epochs = 40;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;   // stop once ||w_e - w_{e-1}|| / max(1, ||w_{e-1}||) < tolerance

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;
  Hyperparams hyperparams;
  std::uint64_t feature_space_fingerprint = 0;
  std::size_t epochs_run = 0;
  // Opaque JSON object carried through save/load (tool version, config hash, inputs).
  std::string provenance = "{}";
};

/// Linear SVM via seeded, epoch-shuffled Pegasos subgradient steps of size
/// 1/(lambda t), lambda = 1/(C n). The bias is an augmented constant-1 feature
/// and is regularised with the weights.
/// Throws SingleClass, DimensionMismatch, LengthMismatch.
LinearModel train(std::span<const SparseVector> samples, std::span<const Label> labels,
                  const Hyperparams& hp, std::uint64_t feature_space_fingerprint = 0);

/// (1/2)||w||^2 + C * sum(max(0, 1 - y (w.x + b))).
double hinge_objective(const LinearModel& model, std::span<const SparseVector> samples,
                       std::span<const Label> labels, double c);

/// w.x + b. Throws DimensionMismatch.
double decision_value(const LinearModel& model, const SparseVector& x);
/// Troll iff the decision value is strictly positive.
Label classify(const LinearModel& model, const SparseVector& x);
/// Throws FingerprintMismatch when the model was trained in another feature space.
void require_compatible(const LinearModel& model, const FeatureSpace& space);

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
  friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  Confusion confusion;

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

Metrics metrics_from_confusion(const Confusion& c) noexcept;
/// Positive class is Troll. Throws LengthMismatch, Empty.
Metrics compute_metrics(std::span<const Label> predictions, std::span<const Label> labels);

struct KFoldResult {
  Metrics mean;                // unweighted mean of fold rates; confusion summed over folds
  std::vector<Metrics> folds;
};

/// Fold id per sample. Each class is shuffled and dealt round-robin over the folds.
std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t k,
                                          std::uint64_t seed);

/// Stratified k-fold. SMOTE, when given, runs on each training split only.
KFoldResult kfold_evaluate(std::span<const SparseVector> samples, std::span<const Label> labels,
                           std::size_t k, const Hyperparams& hp, const std::optional<SmoteConfig>& smote,
                           std::size_t threads = 1);

/// Binary container; see docs/FORMATS.md.
void save_model(const LinearModel& model, const std::filesystem::path& path);
LinearModel load_model(const std::filesystem::path& path);
std::string serialize_model(const LinearModel& model);
LinearModel deserialize_model(std::string_view bytes);

}  // namespace trollguard
