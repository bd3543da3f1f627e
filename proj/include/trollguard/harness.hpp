#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "trollguard/atd.hpp"
#include "trollguard/detector.hpp"
#include "trollguard/pipeline.hpp"

namespace trollguard {

struct ArmsRaceCounts {
  std::size_t total = 0;
  std::size_t flagged = 0;             // classified Troll at stage 1
  std::size_t flagged_trolls = 0;      // ... and labelled Troll
  std::size_t evaded = 0;              // flagged trolls classified NonTroll after rewriting
  std::size_t flagged_false_positives = 0;
  std::size_t false_positives_cleared = 0;
  std::size_t rewritten = 0;           // flagged tweets with at least one edit
  std::size_t replaced_tokens = 0;
  std::size_t removed_tokens = 0;

  friend bool operator==(const ArmsRaceCounts&, const ArmsRaceCounts&) = default;
};

struct ArmsRaceFingerprints {
  std::uint64_t feature_space = 0;
  std::uint64_t targets = 0;
  std::uint64_t chain = 0;
  std::uint64_t resources = 0;

  friend bool operator==(const ArmsRaceFingerprints&, const ArmsRaceFingerprints&) = default;
};

struct ArmsRaceReport {
  Metrics pre;
  Metrics post;
  double evasion_rate = 0.0;  // evaded / flagged_trolls, 0 when nothing was flagged
  ArmsRaceCounts counts;
  ArmsRaceFingerprints fingerprints;
  std::uint64_t seed = 0;
  std::string provenance = "{}";  // opaque JSON object

  /// post.recall - pre.recall, and the same relative to pre.recall (0 when pre.recall is 0).
  double recall_change() const noexcept { return post.recall - pre.recall; }
  double relative_recall_change() const noexcept;

  std::string to_json() const;
  static ArmsRaceReport from_json(std::string_view text);
  /// Metric / Pre / Post / Change table followed by the evasion summary.
  std::string to_text() const;

  friend bool operator==(const ArmsRaceReport&, const ArmsRaceReport&) = default;
};

struct RewrittenTweet {
  TweetRecord record;
  std::vector<Edit> trace;
};

/// Rewrites the chain stream of one tweet. Structured hashtags that do not
/// appear inline are appended as a trailing '#' run first; the hashtag field
/// of the result is re-derived from the rewritten text. A tweet without any
/// target comes back unchanged.
RewrittenTweet rewrite_record(const TweetRecord& record, const TargetMatcher& targets,
                              const MarkovChain& chain, std::uint64_t seed);

/// Per-tweet rewrite seed: independent of processing order and thread count.
std::uint64_t tweet_seed(std::uint64_t run_seed, std::string_view tweet_id) noexcept;

struct ArmsRaceOutcome {
  ArmsRaceReport report;
  std::vector<TweetRecord> tweets;       // final corpus; unflagged tweets untouched
  std::vector<Label> pre_predictions;
  std::vector<Label> post_predictions;
  std::vector<std::vector<Edit>> traces; // empty for unflagged tweets
};

/// classify -> rewrite flagged tweets -> re-featurize -> classify.
/// Throws FingerprintMismatch when the detector does not belong to the featurizer's space.
ArmsRaceOutcome run_arms_race(const LinearModel& detector, const Featurizer& featurizer,
                              const TargetWordList& targets, const MarkovChain& chain,
                              std::span<const TweetRecord> tweets, std::uint64_t seed,
                              std::size_t threads = 1);

enum class ReportFormat { Json, Text };

void emit_report(const ArmsRaceReport& report, const std::filesystem::path& path, ReportFormat format);

/// Metric / Score table (no change column), as used by k-fold evaluation output.
std::string metrics_table(const Metrics& m);

}  // namespace trollguard
