#include "trollguard/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "json.hpp"
#include "trollguard/error.hpp"
#include "trollguard/hashing.hpp"
#include "trollguard/parallel.hpp"
#include "trollguard/random.hpp"

namespace trollguard {
namespace {

constexpr int kReportVersion = 1;

nlohmann::ordered_json metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy},   {"precision", m.precision}, {"recall", m.recall},
          {"f1", m.f1},               {"tp", m.confusion.tp},     {"fp", m.confusion.fp},
          {"fn", m.confusion.fn},     {"tn", m.confusion.tn}};
}

Metrics metrics_from(const nlohmann::ordered_json& j) {
  Metrics m;
  m.accuracy = j.at("accuracy").get<double>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f1 = j.at("f1").get<double>();
  m.confusion.tp = j.at("tp").get<std::size_t>();
  m.confusion.fp = j.at("fp").get<std::size_t>();
  m.confusion.fn = j.at("fn").get<std::size_t>();
  m.confusion.tn = j.at("tn").get<std::size_t>();
  return m;
}

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // Avoid printing "-0.000" for changes that round to zero.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

std::string signed3(double v) {
  std::string s = fixed3(v);
  if (s != "0.000" && s.front() != '-') s.insert(s.begin(), '+');
  return s;
}

bool hashtag_inline(const std::vector<std::string>& tokens, std::string_view tag) {
  const std::string key = to_lower_ascii(tag);
  return std::any_of(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return !t.empty() && t.front() == '#' && normalize_hashtag(t) == key;
  });
}

}  // namespace

double ArmsRaceReport::relative_recall_change() const noexcept {
  return pre.recall > 0.0 ? (post.recall - pre.recall) / pre.recall : 0.0;
}

std::string ArmsRaceReport::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "trollguard.arms_race_report";
  doc["version"] = kReportVersion;
  doc["seed"] = seed;
  doc["pre"] = metrics_json(pre);
  doc["post"] = metrics_json(post);
  doc["change"] = {{"accuracy", post.accuracy - pre.accuracy},
                   {"precision", post.precision - pre.precision},
                   {"recall", post.recall - pre.recall},
                   {"f1", post.f1 - pre.f1},
                   {"recall_relative", relative_recall_change()}};
  doc["evasion_rate"] = evasion_rate;
  doc["counts"] = {{"total", counts.total},
                   {"flagged", counts.flagged},
                   {"flagged_trolls", counts.flagged_trolls},
                   {"evaded", counts.evaded},
                   {"flagged_false_positives", counts.flagged_false_positives},
                   {"false_positives_cleared", counts.false_positives_cleared},
                   {"rewritten", counts.rewritten},
                   {"replaced_tokens", counts.replaced_tokens},
                   {"removed_tokens", counts.removed_tokens}};
  doc["fingerprints"] = {{"feature_space", hex64(fingerprints.feature_space)},
                         {"targets", hex64(fingerprints.targets)},
                         {"chain", hex64(fingerprints.chain)},
                         {"resources", hex64(fingerprints.resources)}};
  doc["provenance"] = nlohmann::ordered_json::parse(provenance);
  return doc.dump(2) + "\n";
}

ArmsRaceReport ArmsRaceReport::from_json(std::string_view text) {
  ArmsRaceReport r;
  try {
    const auto doc = nlohmann::ordered_json::parse(text);
    if (doc.at("version").get<int>() != kReportVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported report version");
    }
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.pre = metrics_from(doc.at("pre"));
    r.post = metrics_from(doc.at("post"));
    r.evasion_rate = doc.at("evasion_rate").get<double>();
    const auto& c = doc.at("counts");
    r.counts.total = c.at("total").get<std::size_t>();
    r.counts.flagged = c.at("flagged").get<std::size_t>();
    r.counts.flagged_trolls = c.at("flagged_trolls").get<std::size_t>();
    r.counts.evaded = c.at("evaded").get<std::size_t>();
    r.counts.flagged_false_positives = c.at("flagged_false_positives").get<std::size_t>();
    r.counts.false_positives_cleared = c.at("false_positives_cleared").get<std::size_t>();
    r.counts.rewritten = c.at("rewritten").get<std::size_t>();
    r.counts.replaced_tokens = c.at("replaced_tokens").get<std::size_t>();
    r.counts.removed_tokens = c.at("removed_tokens").get<std::size_t>();
    const auto& f = doc.at("fingerprints");
    r.fingerprints.feature_space = parse_hex64(f.at("feature_space").get<std::string>());
    r.fingerprints.targets = parse_hex64(f.at("targets").get<std::string>());
    r.fingerprints.chain = parse_hex64(f.at("chain").get<std::string>());
    r.fingerprints.resources = parse_hex64(f.at("resources").get<std::string>());
    r.provenance = doc.at("provenance").dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("report JSON: ") + e.what());
  }
  return r;
}

std::string ArmsRaceReport::to_text() const {
  std::string out;
  char line[128];
  std::snprintf(line, sizeof line, "%-10s %8s %8s %8s\n", "Metric", "Pre", "Post", "Change");
  out += line;
  const std::pair<const char*, std::pair<double, double>> rows[] = {
      {"Accuracy", {pre.accuracy, post.accuracy}},
      {"Precision", {pre.precision, post.precision}},
      {"Recall", {pre.recall, post.recall}},
      {"F1 Score", {pre.f1, post.f1}},
  };
  for (const auto& [name, values] : rows) {
    std::snprintf(line, sizeof line, "%-10s %8s %8s %8s\n", name, fixed3(values.first).c_str(),
                  fixed3(values.second).c_str(), signed3(values.second - values.first).c_str());
    out += line;
  }
  out += "\nRelative recall change: " + signed3(relative_recall_change()) + "\n";
  out += "Evasion rate: " + fixed3(evasion_rate) + " (" + std::to_string(counts.evaded) + " of " +
         std::to_string(counts.flagged_trolls) + " flagged trolls)\n";
  out += "False positives cleared: " + std::to_string(counts.false_positives_cleared) + " of " +
         std::to_string(counts.flagged_false_positives) + "\n";
  out += "Tweets rewritten: " + std::to_string(counts.rewritten) + " of " +
         std::to_string(counts.flagged) + " flagged (" + std::to_string(counts.replaced_tokens) +
         " replaced, " + std::to_string(counts.removed_tokens) + " removed)\n";
  return out;
}

std::string metrics_table(const Metrics& m) {
  std::string out;
  char line[96];
  std::snprintf(line, sizeof line, "%-10s %8s\n", "Metric", "Score");
  out += line;
  const std::pair<const char*, double> rows[] = {
      {"Accuracy", m.accuracy}, {"Precision", m.precision}, {"Recall", m.recall}, {"F1 Score", m.f1}};
  for (const auto& [name, v] : rows) {
    std::snprintf(line, sizeof line, "%-10s %8s\n", name, fixed3(v).c_str());
    out += line;
  }
  return out;
}

std::uint64_t tweet_seed(std::uint64_t run_seed, std::string_view tweet_id) noexcept {
  return splitmix64(derive_seed(run_seed, "rewrite") ^ fnv1a(tweet_id));
}

RewrittenTweet rewrite_record(const TweetRecord& record, const TargetMatcher& targets,
                              const MarkovChain& chain, std::uint64_t seed) {
  std::vector<std::string> stream = split_whitespace(record.text);
  for (const auto& tag : record.hashtags) {
    if (!hashtag_inline(stream, tag)) stream.push_back("#" + tag);
  }
  auto result = rewrite(stream, targets, chain, seed);
  RewrittenTweet out{record, std::move(result.trace)};
  if (out.trace.empty()) return out;

  out.record.text = join_tokens(result.tokens);
  out.record.hashtags.clear();
  for (const auto& token : result.tokens) {
    if (token.empty() || token.front() != '#') continue;
    std::string tag(strip_punctuation(token));
    std::erase(tag, '#');
    if (tag.empty()) continue;
    if (std::find(out.record.hashtags.begin(), out.record.hashtags.end(), tag) == out.record.hashtags.end()) {
      out.record.hashtags.push_back(std::move(tag));
    }
  }
  return out;
}

ArmsRaceOutcome run_arms_race(const LinearModel& detector, const Featurizer& featurizer,
                              const TargetWordList& targets, const MarkovChain& chain,
                              std::span<const TweetRecord> tweets, std::uint64_t seed,
                              std::size_t threads) {
  require_compatible(detector, featurizer.space());
  const std::vector<Label> labels = labels_of(tweets);
  const std::size_t n = tweets.size();
  const TargetMatcher matcher(targets);

  ArmsRaceOutcome out;
  out.pre_predictions.resize(n);
  out.post_predictions.resize(n);
  out.traces.resize(n);
  out.tweets.assign(tweets.begin(), tweets.end());

  parallel_for(n, threads, [&](std::size_t i) {
    const Label first = classify(detector, featurizer.vectorize(tweets[i]));
    out.pre_predictions[i] = first;
    out.post_predictions[i] = first;
    if (first != Label::Troll) return;
    auto rewritten = rewrite_record(tweets[i], matcher, chain, tweet_seed(seed, tweets[i].id));
    if (!rewritten.trace.empty()) {
      out.post_predictions[i] = classify(detector, featurizer.vectorize(rewritten.record));
      out.tweets[i] = std::move(rewritten.record);
      out.traces[i] = std::move(rewritten.trace);
    }
  });

  auto& report = out.report;
  report.seed = seed;
  report.counts.total = n;
  if (n > 0) {
    report.pre = compute_metrics(out.pre_predictions, labels);
    report.post = compute_metrics(out.post_predictions, labels);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (out.pre_predictions[i] != Label::Troll) continue;
    ++report.counts.flagged;
    const bool cleared = out.post_predictions[i] == Label::NonTroll;
    if (labels[i] == Label::Troll) {
      ++report.counts.flagged_trolls;
      if (cleared) ++report.counts.evaded;
    } else {
      ++report.counts.flagged_false_positives;
      if (cleared) ++report.counts.false_positives_cleared;
    }
    if (!out.traces[i].empty()) ++report.counts.rewritten;
    for (const auto& e : out.traces[i]) {
      ++(e.action == EditAction::Replaced ? report.counts.replaced_tokens : report.counts.removed_tokens);
    }
  }
  report.evasion_rate = report.counts.flagged_trolls == 0
                            ? 0.0
                            : static_cast<double>(report.counts.evaded) /
                                  static_cast<double>(report.counts.flagged_trolls);
  report.fingerprints = {featurizer.space().fingerprint(), targets.fingerprint(), chain.fingerprint(),
                         featurizer.resources().fingerprint()};
  return out;
}

void emit_report(const ArmsRaceReport& report, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write report " + path.string());
  out << (format == ReportFormat::Json ? report.to_json() : report.to_text());
  if (!out) throw Error(ErrorCode::Io, "failed writing report " + path.string());
}

}  // namespace trollguard
