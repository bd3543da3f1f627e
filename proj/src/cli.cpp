#include "trollguard/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "trollguard/error.hpp"
#include "trollguard/harness.hpp"
#include "trollguard/hashing.hpp"
#include "trollguard/parallel.hpp"
#include "trollguard/synthetic.hpp"
#include "trollguard/workflow.hpp"

namespace trollguard::cli {
namespace {

using ojson = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr std::uint64_t kDefaultSeed = 2020;
constexpr int kSpaceFileVersion = 1;
constexpr int kEvalReportVersion = 1;

// Raised for problems CLI11 cannot see, such as an output directory that does not exist.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string file_fingerprint(const fs::path& path) { return hex64(fnv1a(read_text_file(path))); }

class Provenance {
 public:
  explicit Provenance(std::string command) : command_(std::move(command)) {}

  ojson& config() { return config_; }

  void input(const std::string& name, const fs::path& path) {
    inputs_[name] = {{"path", path.generic_string()}, {"fingerprint", file_fingerprint(path)}};
  }

  std::string dump() const {
    ojson doc;
    doc["tool"] = "trollguard";
    doc["tool_version"] = kToolVersion;
    doc["command"] = command_;
    doc["config"] = config_;
    doc["config_hash"] = hex64(fnv1a(config_.dump()));
    doc["inputs"] = inputs_;
    return doc.dump();
  }

 private:
  std::string command_;
  ojson config_ = ojson::object();
  ojson inputs_ = ojson::object();
};

// Recomputes the fingerprints of every input an artifact records and that
// still exists at its recorded path.
void verify_inputs(std::string_view artifact, std::string_view provenance, std::ostream& err) {
  const auto doc = ojson::parse(provenance, nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("inputs")) {
    err << "verify: " << artifact << " carries no input fingerprints\n";
    return;
  }
  for (const auto& [name, entry] : doc.at("inputs").items()) {
    const fs::path path = entry.at("path").get<std::string>();
    if (!fs::exists(path)) {
      err << "verify: " << artifact << " input '" << name << "' (" << path.string()
          << ") is no longer present; skipped\n";
      continue;
    }
    const auto expected = entry.at("fingerprint").get<std::string>();
    const auto actual = file_fingerprint(path);
    if (expected != actual) {
      throw Error(ErrorCode::FingerprintMismatch, std::string(artifact) + " input '" + name + "' (" +
                                                      path.string() + ") changed: recorded " + expected +
                                                      ", now " + actual);
    }
  }
  err << "verify: " << artifact << " ok\n";
}

void require_parent_dir(const std::string& path) {
  if (path == "-") return;
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) {
    throw UsageError("output directory does not exist: " + parent.string());
  }
}

void write_file(const std::string& path, std::string_view bytes, std::ostream& out) {
  if (path == "-") {
    out << bytes;
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + path);
  file << bytes;
  if (!file) throw Error(ErrorCode::Io, "failed writing " + path);
}

void write_corpus(const std::string& path, std::span<const TweetRecord> records) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error(ErrorCode::Io, "cannot write " + path);
  if (format_for(path) == CorpusFormat::Jsonl) {
    write_jsonl(file, records);
  } else {
    write_csv(file, records);
  }
  if (!file) throw Error(ErrorCode::Io, "failed writing " + path);
}

std::vector<TweetRecord> read_corpus(const std::string& path) { return load_corpus(path, format_for(path)); }

// ---- shared flag groups ----

struct ResourceFlags {
  std::string data_dir;
  std::string rules;
  std::string stoplist;
  std::string lexicon;
  std::string negators;

  void attach(CLI::App* app) {
    app->add_option("--data-dir", data_dir,
                    "Directory with rules.json, stoplist.txt, lexicon.tsv, negators.txt (default: $" +
                        std::string(kDataDirEnv) + ", else built-in copies)")
        ->check(CLI::ExistingDirectory);
    app->add_option("--rules", rules, "Hashtag category and trope rules (JSON)")->check(CLI::ExistingFile);
    app->add_option("--stoplist", stoplist, "Stoplist, one word per line")->check(CLI::ExistingFile);
    app->add_option("--lexicon", lexicon, "Sentiment lexicon (word<TAB>valence)")->check(CLI::ExistingFile);
    app->add_option("--negators", negators, "Negator words, one per line")->check(CLI::ExistingFile);
  }

  PipelineResources resolve() const {
    std::string dir = data_dir;
    if (dir.empty()) {
      if (const char* env = std::getenv(std::string(kDataDirEnv).c_str())) dir = env;
    }
    auto pick = [&](const std::string& flag, const char* file) -> std::optional<fs::path> {
      if (!flag.empty()) return fs::path(flag);
      if (!dir.empty() && fs::exists(fs::path(dir) / file)) return fs::path(dir) / file;
      return std::nullopt;
    };
    return PipelineResources::load(pick(stoplist, "stoplist.txt"), pick(rules, "rules.json"),
                                   pick(lexicon, "lexicon.tsv"), pick(negators, "negators.txt"));
  }
};

struct SpaceFlags {
  double text_min_df = 0.01;
  std::size_t hashtag_min_df = 2;

  void attach(CLI::App* app) {
    app->add_option("--min-df", text_min_df, "Minimum document fraction for text tokens")
        ->check(CLI::Range(0.0, 1.0));
    app->add_option("--hashtag-min-df", hashtag_min_df, "Minimum document count for hashtags");
  }

  SpaceConfig config() const {
    return {DfThreshold::of_fraction(text_min_df), DfThreshold::of_count(hashtag_min_df)};
  }

  void record(ojson& cfg) const {
    cfg["text_min_df"] = text_min_df;
    cfg["hashtag_min_df"] = hashtag_min_df;
  }
};

struct DetectorFlags {
  SpaceFlags space;
  double c = 1.0;
  std::size_t epochs = 40;
  double tolerance = 1e-4;
  std::size_t smote_k = 5;
  double smote_ratio = 1.0;
  bool no_smote = false;

  void attach(CLI::App* app) {
    space.attach(app);
    app->add_option("--c", c, "SVM regularisation constant")->check(CLI::PositiveNumber);
    app->add_option("--epochs", epochs, "Maximum SVM epochs")->check(CLI::Range(1, 100000));
    app->add_option("--tolerance", tolerance, "Relative weight-change stopping tolerance")
        ->check(CLI::NonNegativeNumber);
    app->add_option("--smote-k", smote_k, "SMOTE nearest neighbours")->check(CLI::Range(1, 1000));
    app->add_option("--smote-ratio", smote_ratio, "Minority target as a fraction of the majority")
        ->check(CLI::PositiveNumber);
    app->add_flag("--no-smote", no_smote, "Train on the imbalanced data as is");
  }

  workflow::DetectorOptions options() const {
    workflow::DetectorOptions o;
    o.space = space.config();
    o.svm.c = c;
    o.svm.epochs = epochs;
    o.svm.tolerance = tolerance;
    o.smote.k_neighbors = smote_k;
    o.smote.target_ratio = smote_ratio;
    o.oversample = !no_smote;
    return o;
  }

  void record(ojson& cfg) const {
    space.record(cfg);
    cfg["c"] = c;
    cfg["epochs"] = epochs;
    cfg["tolerance"] = tolerance;
    cfg["smote"] = {{"enabled", !no_smote}, {"k", smote_k}, {"ratio", smote_ratio}};
  }
};

// ---- feature-space file ----

std::string space_file_json(const Featurizer& featurizer, const std::string& provenance) {
  ojson doc;
  doc["format"] = "trollguard.detector_space";
  doc["version"] = kSpaceFileVersion;
  doc["resources_fingerprint"] = hex64(featurizer.resources().fingerprint());
  doc["provenance"] = ojson::parse(provenance);
  doc["space"] = ojson::parse(featurizer.space().to_json());
  return doc.dump(1) + "\n";
}

struct LoadedSpace {
  Featurizer featurizer;
  std::string provenance;
};

LoadedSpace load_space_file(const std::string& path, PipelineResources resources) {
  ojson doc;
  try {
    doc = ojson::parse(read_text_file(path));
    if (doc.at("format").get<std::string>() != "trollguard.detector_space") {
      throw Error(ErrorCode::CorruptFile, path + " is not a detector space file");
    }
    if (doc.at("version").get<int>() != kSpaceFileVersion) {
      throw Error(ErrorCode::VersionMismatch, path + ": unsupported space file version");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, path + ": " + e.what());
  }
  const auto recorded = parse_hex64(doc.at("resources_fingerprint").get<std::string>());
  if (recorded != resources.fingerprint()) {
    throw Error(ErrorCode::FingerprintMismatch,
                path + " was fitted with different rules, stoplist or lexicon; pass the same resource flags");
  }
  auto space = FeatureSpace::from_json(doc.at("space").dump());
  return {Featurizer(std::move(resources), std::move(space)), doc.at("provenance").dump()};
}

std::string default_space_path(const std::string& model_path) { return model_path + ".space.json"; }

// ---- subcommands ----

struct Common {
  std::uint64_t seed = kDefaultSeed;
  std::size_t threads = default_threads();
  bool verify = false;
};

void add_seed(CLI::App* app, Common& common) {
  app->add_option("--seed", common.seed, "Root seed; each stage derives its own");
}

void add_threads(CLI::App* app, Common& common) {
  app->add_option("--threads", common.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 4096));
}

void add_verify(CLI::App* app, Common& common) {
  app->add_flag("--verify", common.verify, "Re-hash the inputs recorded in every artifact before use");
}

std::string metrics_summary(const Metrics& m) {
  std::ostringstream s;
  s.precision(3);
  s << std::fixed << "accuracy " << m.accuracy << ", precision " << m.precision << ", recall " << m.recall
    << ", F1 " << m.f1;
  return s.str();
}

ojson metrics_json(const Metrics& m) {
  return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1},
          {"tp", m.confusion.tp},   {"fp", m.confusion.fp},         {"fn", m.confusion.fn},
          {"tn", m.confusion.tn}};
}

struct IngestCmd {
  std::string corpus;
  std::string out;

  int run(std::ostream& out_stream, std::ostream& err) const {
    const auto records = read_corpus(corpus);
    std::map<std::string, std::size_t> kinds{{"original", 0}, {"retweet", 0}, {"reply", 0}};
    std::size_t trolls = 0, non_trolls = 0, with_tags = 0;
    std::vector<std::string> tags;
    for (const auto& r : records) {
      ++kinds[std::string(to_string(r.kind))];
      if (r.label == Label::Troll) ++trolls;
      if (r.label == Label::NonTroll) ++non_trolls;
      if (!r.hashtags.empty()) ++with_tags;
      for (const auto& t : r.hashtags) tags.push_back(to_lower_ascii(t));
    }
    std::sort(tags.begin(), tags.end());
    tags.erase(std::unique(tags.begin(), tags.end()), tags.end());

    err << "ingest: " << records.size() << " records, " << trolls << " troll, " << non_trolls
        << " non-troll, " << (records.size() - trolls - non_trolls) << " unlabelled\n";
    if (out.empty()) return kSuccess;

    ojson stats;
    stats["format"] = "trollguard.corpus_stats";
    stats["version"] = 1;
    stats["records"] = records.size();
    stats["labels"] = {{"troll", trolls},
                       {"non_troll", non_trolls},
                       {"unlabelled", records.size() - trolls - non_trolls}};
    stats["kinds"] = kinds;
    stats["with_hashtags"] = with_tags;
    stats["distinct_hashtags"] = tags.size();
    Provenance prov("ingest");
    prov.input("corpus", corpus);
    stats["provenance"] = ojson::parse(prov.dump());
    write_file(out, stats.dump(2) + "\n", out_stream);
    return kSuccess;
  }
};

struct SynthCmd {
  std::string out;
  std::size_t size = 2000;
  double troll_rate = 0.03;

  int run(const Common& common, std::ostream& err) const {
    const auto records = synthetic::generate_benchmark({size, troll_rate, common.seed});
    write_corpus(out, records);
    err << "synth: wrote " << records.size() << " tweets to " << out << "\n";
    return kSuccess;
  }
};

struct TrainCmd {
  std::string corpus;
  std::string out;
  std::string space_out;
  ResourceFlags resources;
  DetectorFlags detector;

  int run(const Common& common, std::ostream& err) const {
    const auto records = read_corpus(corpus);
    err << "train: fitting on " << records.size() << " tweets\n";
    auto trained = workflow::fit_detector(records, resources.resolve(), detector.options(), common.seed,
                                          common.threads);

    Provenance prov("train");
    detector.record(prov.config());
    prov.config()["seed"] = common.seed;
    prov.config()["resources_fingerprint"] = hex64(trained.featurizer.resources().fingerprint());
    prov.input("corpus", corpus);
    trained.model.provenance = prov.dump();

    const std::string space_path = space_out.empty() ? default_space_path(out) : space_out;
    save_model(trained.model, out);
    write_file(space_path, space_file_json(trained.featurizer, prov.dump()), err);
    err << "train: " << trained.featurizer.space().dimension() << " features, "
        << trained.synthetic_samples << " synthetic samples, " << trained.model.epochs_run
        << " epochs; wrote " << out << " and " << space_path << "\n";
    return kSuccess;
  }
};

struct EvalCmd {
  std::string corpus;
  std::string out;
  std::string format = "text";
  std::size_t folds = 10;
  ResourceFlags resources;
  DetectorFlags detector;

  int run(const Common& common, std::ostream& out_stream, std::ostream& err) const {
    const auto records = read_corpus(corpus);
    const auto result = workflow::evaluate_detector(records, resources.resolve(), detector.options(), folds,
                                                    common.seed, common.threads);
    err << "eval: " << folds << "-fold mean " << metrics_summary(result.mean) << "\n";

    Provenance prov("eval");
    detector.record(prov.config());
    prov.config()["folds"] = folds;
    prov.config()["seed"] = common.seed;
    prov.input("corpus", corpus);

    std::string body;
    if (format == "json") {
      ojson doc;
      doc["format"] = "trollguard.kfold_report";
      doc["version"] = kEvalReportVersion;
      doc["folds"] = folds;
      doc["mean"] = metrics_json(result.mean);
      doc["per_fold"] = ojson::array();
      for (const auto& m : result.folds) doc["per_fold"].push_back(metrics_json(m));
      doc["provenance"] = ojson::parse(prov.dump());
      body = doc.dump(2) + "\n";
    } else {
      body = metrics_table(result.mean);
      body += "\n" + std::to_string(folds) + "-fold stratified cross-validation, unweighted fold mean\n";
    }
    write_file(out, body, out_stream);
    return kSuccess;
  }
};

struct ClassifyCmd {
  std::string model;
  std::string space;
  std::string corpus;
  std::string out;
  ResourceFlags resources;

  int run(const Common& common, std::ostream& err) const {
    const auto detector = load_model(model);
    const auto loaded = load_space_file(space.empty() ? default_space_path(model) : space, resources.resolve());
    if (common.verify) verify_inputs("model", detector.provenance, err);
    require_compatible(detector, loaded.featurizer.space());

    const auto records = read_corpus(corpus);
    const auto rows = loaded.featurizer.vectorize_all(records, common.threads);
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw Error(ErrorCode::Io, "cannot write " + out);
    file << "id,prediction,decision_value\n";
    std::vector<Label> predicted;
    predicted.reserve(rows.size());
    char value[40];
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const double d = decision_value(detector, rows[i]);
      predicted.push_back(d > 0.0 ? Label::Troll : Label::NonTroll);
      std::snprintf(value, sizeof value, "%.17g", d);
      std::string id = records[i].id;
      if (id.find_first_of(",\"\n\r") != std::string::npos) {
        std::string quoted = "\"";
        for (char ch : id) quoted += ch == '"' ? std::string("\"\"") : std::string(1, ch);
        id = quoted + "\"";
      }
      file << id << ',' << to_string(predicted.back()) << ',' << value << '\n';
    }
    if (!file) throw Error(ErrorCode::Io, "failed writing " + out);

    const bool labelled = std::all_of(records.begin(), records.end(), [](const auto& r) { return r.label; });
    if (labelled && !records.empty()) {
      err << "classify: " << metrics_summary(compute_metrics(predicted, labels_of(records))) << "\n";
    }
    err << "classify: wrote " << rows.size() << " predictions to " << out << "\n";
    return kSuccess;
  }
};

struct BuildChainCmd {
  std::vector<std::string> corpora;
  std::string out;

  int run(std::ostream& err) const {
    MarkovChain chain;
    Provenance prov("build-chain");
    for (std::size_t i = 0; i < corpora.size(); ++i) {
      chain.merge(workflow::chain_from_corpus(read_corpus(corpora[i])));
      prov.input("corpus" + (i == 0 ? std::string() : std::to_string(i + 1)), corpora[i]);
    }
    chain.provenance = prov.dump();
    save_chain(chain, out);
    err << "build-chain: " << chain.state_count() << " states, " << chain.pair_count() << " pairs; wrote "
        << out << "\n";
    return kSuccess;
  }
};

struct SelectTargetsCmd {
  std::string corpus;
  std::string space;
  std::string out;
  std::size_t max_depth = 20;
  std::size_t min_split = 2;
  bool no_smote = false;
  ResourceFlags resources;
  SpaceFlags space_flags;

  int run(const Common& common, std::ostream& err) const {
    const auto records = read_corpus(corpus);
    Provenance prov("select-targets");
    std::optional<Featurizer> featurizer;
    if (!space.empty()) {
      auto loaded = load_space_file(space, resources.resolve());
      if (common.verify) verify_inputs("space", loaded.provenance, err);
      featurizer.emplace(std::move(loaded.featurizer));
      prov.input("space", space);
    } else {
      featurizer.emplace(Featurizer::fit(records, resources.resolve(), space_flags.config(), common.threads));
      space_flags.record(prov.config());
    }
    workflow::SubstituteOptions options;
    options.tree = {max_depth, min_split};
    options.oversample = !no_smote;

    auto targets = workflow::derive_targets(*featurizer, records, options, common.seed, common.threads);
    prov.config()["max_depth"] = max_depth;
    prov.config()["min_samples_split"] = min_split;
    prov.config()["smote"] = !no_smote;
    prov.config()["p_value"] = kTargetPValue;
    prov.config()["seed"] = common.seed;
    prov.config()["feature_space_fingerprint"] = hex64(featurizer->space().fingerprint());
    prov.input("corpus", corpus);
    targets.provenance = prov.dump();
    save_targets(targets, out);
    err << "select-targets: " << targets.entries.size() << " targets; wrote " << out << "\n";
    return kSuccess;
  }
};

ojson trace_json(const std::string& id, std::span<const Edit> trace) {
  ojson edits = ojson::array();
  for (const auto& e : trace) {
    ojson item{{"position", e.position},
               {"original", e.original},
               {"action", e.action == EditAction::Replaced ? "replaced" : "removed"}};
    if (e.action == EditAction::Replaced) {
      item["sampled"] = e.sampled;
      item["rendered"] = e.rendered;
    }
    item["preceding"] = e.preceding;
    edits.push_back(std::move(item));
  }
  return {{"id", id}, {"edits", std::move(edits)}};
}

struct EvadeCmd {
  std::string corpus;
  std::string targets;
  std::string chain;
  std::string out;
  std::string trace;

  int run(const Common& common, std::ostream& err) const {
    const auto list = load_targets(targets);
    const auto markov = load_chain(chain);
    if (common.verify) {
      verify_inputs("targets", list.provenance, err);
      verify_inputs("chain", markov.provenance, err);
    }
    const auto records = read_corpus(corpus);
    const TargetMatcher matcher(list);
    std::vector<RewrittenTweet> rewritten(records.size());
    parallel_for(records.size(), common.threads, [&](std::size_t i) {
      rewritten[i] = rewrite_record(records[i], matcher, markov, tweet_seed(common.seed, records[i].id));
    });

    std::vector<TweetRecord> result;
    result.reserve(records.size());
    std::size_t changed = 0;
    std::string trace_lines;
    for (auto& r : rewritten) {
      if (!r.trace.empty()) {
        ++changed;
        trace_lines += trace_json(r.record.id, r.trace).dump() + "\n";
      }
      result.push_back(std::move(r.record));
    }
    write_corpus(out, result);
    if (!trace.empty()) write_file(trace, trace_lines, err);
    err << "evade: rewrote " << changed << " of " << records.size() << " tweets; wrote " << out << "\n";
    return kSuccess;
  }
};

struct ArmsRaceCmd {
  std::string model;
  std::string space;
  std::string targets;
  std::string chain;
  std::string corpus;
  std::string out;
  std::string format = "json";
  std::string rewritten_out;
  ResourceFlags resources;

  int run(const Common& common, std::ostream& out_stream, std::ostream& err) const {
    const auto detector = load_model(model);
    const auto loaded = load_space_file(space.empty() ? default_space_path(model) : space, resources.resolve());
    const auto list = load_targets(targets);
    const auto markov = load_chain(chain);
    if (common.verify) {
      verify_inputs("model", detector.provenance, err);
      verify_inputs("space", loaded.provenance, err);
      verify_inputs("targets", list.provenance, err);
      verify_inputs("chain", markov.provenance, err);
    }
    const auto records = read_corpus(corpus);
    auto outcome = run_arms_race(detector, loaded.featurizer, list, markov, records, common.seed, common.threads);

    Provenance prov("arms-race");
    prov.config()["seed"] = common.seed;
    prov.input("model", model);
    prov.input("space", space.empty() ? default_space_path(model) : space);
    prov.input("targets", targets);
    prov.input("chain", chain);
    prov.input("corpus", corpus);
    outcome.report.provenance = prov.dump();

    const auto& report = outcome.report;
    write_file(out, format == "json" ? report.to_json() : report.to_text(), out_stream);
    if (!rewritten_out.empty()) write_corpus(rewritten_out, outcome.tweets);
    err << "arms-race: recall " << report.pre.recall << " -> " << report.post.recall << ", evasion rate "
        << report.evasion_rate << "\n";
    return kSuccess;
  }
};

void check_outputs(std::initializer_list<const std::string*> paths) {
  for (const auto* p : paths) {
    if (!p->empty()) require_parent_dir(*p);
  }
}

}  // namespace

int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Troll-content detector, evader and arms-race harness", "trollguard"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  Common common;

  IngestCmd ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a corpus and report statistics");
  ingest_cmd->add_option("--corpus", ingest.corpus, "Corpus (.csv or .jsonl)")->required()->check(CLI::ExistingFile);
  ingest_cmd->add_option("--out", ingest.out, "Statistics JSON ('-' for stdout)");

  SynthCmd synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write the template-generated benchmark corpus");
  synth_cmd->add_option("--out", synth.out, "Output corpus (.csv or .jsonl)")->required();
  synth_cmd->add_option("--size", synth.size, "Number of tweets")->check(CLI::Range(1, 100000000));
  synth_cmd->add_option("--troll-rate", synth.troll_rate, "Fraction of troll tweets")->check(CLI::Range(0.0, 1.0));
  add_seed(synth_cmd, common);

  TrainCmd train_args;
  auto* train_cmd = app.add_subcommand("train", "Fit the feature space, oversample and train the detector");
  train_cmd->add_option("--corpus", train_args.corpus, "Labelled corpus")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--out", train_args.out, "Model file")->required();
  train_cmd->add_option("--space", train_args.space_out, "Feature-space file (default: <out>.space.json)");
  train_args.resources.attach(train_cmd);
  train_args.detector.attach(train_cmd);
  add_seed(train_cmd, common);
  add_threads(train_cmd, common);

  EvalCmd eval;
  auto* eval_cmd = app.add_subcommand("eval", "Stratified k-fold evaluation of the detector");
  eval_cmd->add_option("--corpus", eval.corpus, "Labelled corpus")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval.out, "Report file ('-' for stdout)")->required();
  eval_cmd->add_option("--format", eval.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  eval_cmd->add_option("--folds", eval.folds, "Number of folds")->check(CLI::Range(2, 1000));
  eval.resources.attach(eval_cmd);
  eval.detector.attach(eval_cmd);
  add_seed(eval_cmd, common);
  add_threads(eval_cmd, common);

  ClassifyCmd classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "Apply a trained detector to a corpus");
  classify_cmd->add_option("--model", classify_args.model, "Model file")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--space", classify_args.space, "Feature-space file (default: <model>.space.json)")
      ->check(CLI::ExistingFile);
  classify_cmd->add_option("--corpus", classify_args.corpus, "Corpus")->required()->check(CLI::ExistingFile);
  classify_cmd->add_option("--out", classify_args.out, "Predictions CSV")->required();
  classify_args.resources.attach(classify_cmd);
  add_threads(classify_cmd, common);
  add_verify(classify_cmd, common);

  BuildChainCmd chain_args;
  auto* chain_cmd = app.add_subcommand("build-chain", "Build the rewrite Markov chain from one or more corpora");
  chain_cmd->add_option("--corpus", chain_args.corpora, "Corpus; repeat to merge several")
      ->required()
      ->check(CLI::ExistingFile);
  chain_cmd->add_option("--out", chain_args.out, "Chain file (JSON)")->required();

  SelectTargetsCmd select;
  auto* select_cmd = app.add_subcommand("select-targets", "Train the substitute tree and pick target words");
  select_cmd->add_option("--corpus", select.corpus, "Labelled corpus")->required()->check(CLI::ExistingFile);
  select_cmd->add_option("--space", select.space, "Feature-space file to reuse (default: fit a new one)")
      ->check(CLI::ExistingFile);
  select_cmd->add_option("--out", select.out, "Target list (JSON)")->required();
  select_cmd->add_option("--max-depth", select.max_depth, "Substitute tree depth limit")->check(CLI::Range(1, 1000));
  select_cmd->add_option("--min-split", select.min_split, "Minimum samples to split a node")
      ->check(CLI::Range(2, 1000000));
  select_cmd->add_flag("--no-smote", select.no_smote, "Train the substitute on the imbalanced data");
  select.resources.attach(select_cmd);
  select.space_flags.attach(select_cmd);
  add_seed(select_cmd, common);
  add_threads(select_cmd, common);
  add_verify(select_cmd, common);

  EvadeCmd evade;
  auto* evade_cmd = app.add_subcommand("evade", "Rewrite every target occurrence in a corpus");
  evade_cmd->add_option("--corpus", evade.corpus, "Corpus")->required()->check(CLI::ExistingFile);
  evade_cmd->add_option("--targets", evade.targets, "Target list")->required()->check(CLI::ExistingFile);
  evade_cmd->add_option("--chain", evade.chain, "Chain file")->required()->check(CLI::ExistingFile);
  evade_cmd->add_option("--out", evade.out, "Rewritten corpus")->required();
  evade_cmd->add_option("--trace", evade.trace, "Per-tweet edit trace (JSON lines)");
  add_seed(evade_cmd, common);
  add_threads(evade_cmd, common);
  add_verify(evade_cmd, common);

  ArmsRaceCmd race;
  auto* race_cmd = app.add_subcommand("arms-race", "Classify, rewrite flagged tweets, re-classify and report");
  race_cmd->add_option("--model", race.model, "Model file")->required()->check(CLI::ExistingFile);
  race_cmd->add_option("--space", race.space, "Feature-space file (default: <model>.space.json)")
      ->check(CLI::ExistingFile);
  race_cmd->add_option("--targets", race.targets, "Target list")->required()->check(CLI::ExistingFile);
  race_cmd->add_option("--chain", race.chain, "Chain file")->required()->check(CLI::ExistingFile);
  race_cmd->add_option("--corpus", race.corpus, "Labelled corpus")->required()->check(CLI::ExistingFile);
  race_cmd->add_option("--out", race.out, "Report file ('-' for stdout)")->required();
  race_cmd->add_option("--format", race.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  race_cmd->add_option("--rewritten", race.rewritten_out, "Also write the post-attack corpus");
  race.resources.attach(race_cmd);
  add_seed(race_cmd, common);
  add_threads(race_cmd, common);
  add_verify(race_cmd, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << "\n";
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "error: " << e.what() << "\n\n" << (subs.empty() ? app.help() : subs.front()->help());
    return kUsageError;
  }

  try {
    if (ingest_cmd->parsed()) {
      check_outputs({&ingest.out});
      return ingest.run(out, err);
    }
    if (synth_cmd->parsed()) {
      check_outputs({&synth.out});
      return synth.run(common, err);
    }
    if (train_cmd->parsed()) {
      check_outputs({&train_args.out, &train_args.space_out});
      return train_args.run(common, err);
    }
    if (eval_cmd->parsed()) {
      check_outputs({&eval.out});
      return eval.run(common, out, err);
    }
    if (classify_cmd->parsed()) {
      check_outputs({&classify_args.out});
      return classify_args.run(common, err);
    }
    if (chain_cmd->parsed()) {
      check_outputs({&chain_args.out});
      return chain_args.run(err);
    }
    if (select_cmd->parsed()) {
      check_outputs({&select.out});
      return select.run(common, err);
    }
    if (evade_cmd->parsed()) {
      check_outputs({&evade.out, &evade.trace});
      return evade.run(common, err);
    }
    if (race_cmd->parsed()) {
      check_outputs({&race.out, &race.rewritten_out});
      return race.run(common, out, err);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    err << "data error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  err << "internal error: no subcommand handled\n";
  return kInternalError;
}

int dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return dispatch(args, std::cout, std::cerr);
}

}  // namespace trollguard::cli
