#include "trollguard/detector.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "trollguard/error.hpp"
#include "trollguard/hashing.hpp"
#include "trollguard/parallel.hpp"
#include "trollguard/random.hpp"
#include "trollguard/simd/kernels.hpp"

namespace trollguard {
namespace {

constexpr char kModelMagic[8] = {'T', 'G', 'L', 'I', 'N', 'S', 'V', 'M'};
constexpr std::uint32_t kModelVersion = 1;

double sign_of(Label label) noexcept { return label == Label::Troll ? 1.0 : -1.0; }

void check_inputs(std::span<const SparseVector> samples, std::span<const Label> labels) {
  if (samples.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "samples and labels differ in length");
  }
  if (samples.empty()) throw Error(ErrorCode::Empty, "no training samples");
  const std::size_t dim = samples.front().dim;
  for (const auto& s : samples) {
    if (s.dim != dim) throw Error(ErrorCode::DimensionMismatch, "samples differ in dimension");
  }
  bool has_troll = false;
  bool has_non = false;
  for (auto l : labels) (l == Label::Troll ? has_troll : has_non) = true;
  if (!has_troll || !has_non) throw Error(ErrorCode::SingleClass, "training needs both classes");
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::CorruptFile, "model file truncated");
    auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }

  std::uint64_t u64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[static_cast<std::size_t>(i)]);
    return v;
  }

  std::size_t position() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

LinearModel train(std::span<const SparseVector> samples, std::span<const Label> labels,
                  const Hyperparams& hp, std::uint64_t feature_space_fingerprint) {
  check_inputs(samples, labels);
  if (!(hp.c > 0.0) || hp.epochs == 0) {
    throw Error(ErrorCode::InvalidArgument, "need C > 0 and at least one epoch");
  }
  const std::size_t n = samples.size();
  const std::size_t dim = samples.front().dim;
  const double lambda = 1.0 / (hp.c * static_cast<double>(n));
  const double radius_sq = 1.0 / lambda;
  const auto& k = simd::active();

  // w = scale * v; the last slot of v is the bias.
  std::vector<double> v(dim + 1, 0.0);
  double scale = 1.0;
  double v_norm_sq = 0.0;
  std::vector<double> x_norm_sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& x = samples[i];
    x_norm_sq[i] = k.dot(x.values.data(), x.values.data(), x.nnz()) + 1.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> previous(dim + 1, 0.0);
  std::vector<double> current(dim + 1, 0.0);
  Rng rng(derive_seed(hp.seed, "svm-shuffle"));

  LinearModel model;
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    for (std::size_t idx : order) {
      ++t;
      const auto& x = samples[idx];
      const double y = sign_of(labels[idx]);
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const double vx = k.sparse_dot(x.indices.data(), x.values.data(), x.nnz(), v.data()) + v[dim];
      const bool violated = y * scale * vx < 1.0;

      if (t == 1) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
        v_norm_sq = 0.0;
      } else {
        scale *= 1.0 - 1.0 / static_cast<double>(t);
      }
      if (violated) {
        const double a = eta * y / scale;
        const double vx_now = t == 1 ? 0.0 : vx;
        for (std::size_t j = 0; j < x.nnz(); ++j) v[x.indices[j]] += a * x.values[j];
        v[dim] += a;
        v_norm_sq += 2.0 * a * vx_now + a * a * x_norm_sq[idx];
      }
      const double w_norm_sq = scale * scale * v_norm_sq;
      if (w_norm_sq > radius_sq) scale *= std::sqrt(radius_sq / w_norm_sq);
      if (scale < 1e-9) {
        k.scale(scale, v.data(), v.size());
        v_norm_sq = k.dot(v.data(), v.data(), v.size());
        scale = 1.0;
      }
    }
    current = v;
    k.scale(scale, current.data(), current.size());
    const double delta = std::sqrt(k.squared_distance(current.data(), previous.data(), current.size()));
    const double ref = std::max(1.0, std::sqrt(k.dot(previous.data(), previous.data(), previous.size())));
    previous.swap(current);
    model.epochs_run = epoch + 1;
    if (epoch > 0 && delta / ref < hp.tolerance) break;
  }

  model.weights.assign(previous.begin(), previous.end() - 1);
  model.bias = previous.back();
  model.hyperparams = hp;
  model.feature_space_fingerprint = feature_space_fingerprint;
  return model;
}

double hinge_objective(const LinearModel& model, std::span<const SparseVector> samples,
                       std::span<const Label> labels, double c) {
  if (samples.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "samples and labels differ in length");
  }
  const auto& k = simd::active();
  double loss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    loss += std::max(0.0, 1.0 - sign_of(labels[i]) * decision_value(model, samples[i]));
  }
  return 0.5 * k.dot(model.weights.data(), model.weights.data(), model.weights.size()) + c * loss;
}

double decision_value(const LinearModel& model, const SparseVector& x) {
  if (x.dim != model.weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "vector dimension " + std::to_string(x.dim) +
                                                  " vs model " + std::to_string(model.weights.size()));
  }
  return simd::active().sparse_dot(x.indices.data(), x.values.data(), x.nnz(), model.weights.data()) +
         model.bias;
}

Label classify(const LinearModel& model, const SparseVector& x) {
  return decision_value(model, x) > 0.0 ? Label::Troll : Label::NonTroll;
}

void require_compatible(const LinearModel& model, const FeatureSpace& space) {
  if (model.feature_space_fingerprint != space.fingerprint()) {
    throw Error(ErrorCode::FingerprintMismatch,
                "model expects feature space " + hex64(model.feature_space_fingerprint) + ", got " +
                    hex64(space.fingerprint()));
  }
  if (model.weights.size() != space.dimension()) {
    throw Error(ErrorCode::DimensionMismatch, "model and feature space differ in dimension");
  }
}

Metrics metrics_from_confusion(const Confusion& c) noexcept {
  Metrics m;
  m.confusion = c;
  const auto ratio = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = (m.precision + m.recall) > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

Metrics compute_metrics(std::span<const Label> predictions, std::span<const Label> labels) {
  if (predictions.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "predictions and labels differ in length");
  }
  if (predictions.empty()) throw Error(ErrorCode::Empty, "no predictions");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool predicted = predictions[i] == Label::Troll;
    const bool actual = labels[i] == Label::Troll;
    if (predicted && actual) ++c.tp;
    else if (predicted) ++c.fp;
    else if (actual) ++c.fn;
    else ++c.tn;
  }
  return metrics_from_confusion(c);
}

std::vector<std::size_t> stratified_folds(std::span<const Label> labels, std::size_t k,
                                          std::uint64_t seed) {
  if (k < 2) throw Error(ErrorCode::InvalidArgument, "k-fold needs k >= 2");
  if (labels.size() < k) throw Error(ErrorCode::InvalidArgument, "fewer samples than folds");
  std::vector<std::size_t> fold(labels.size());
  Rng rng(derive_seed(seed, "stratified-folds"));
  std::size_t dealt = 0;
  for (Label cls : {Label::Troll, Label::NonTroll}) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == cls) members.push_back(i);
    }
    for (std::size_t i = members.size(); i > 1; --i) std::swap(members[i - 1], members[rng.below(i)]);
    // Continue dealing where the previous class stopped so fold sizes stay within one.
    for (std::size_t idx : members) fold[idx] = dealt++ % k;
  }
  return fold;
}

KFoldResult kfold_evaluate(std::span<const SparseVector> samples, std::span<const Label> labels,
                           std::size_t k, const Hyperparams& hp, const std::optional<SmoteConfig>& smote,
                           std::size_t threads) {
  if (samples.size() != labels.size()) {
    throw Error(ErrorCode::LengthMismatch, "samples and labels differ in length");
  }
  const auto fold = stratified_folds(labels, k, hp.seed);
  KFoldResult result;
  result.folds.resize(k);

  parallel_for(k, threads, [&](std::size_t f) {
    std::vector<SparseVector> train_x;
    std::vector<Label> train_y;
    std::vector<SparseVector> minority;
    std::size_t majority = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (fold[i] == f) continue;
      train_x.push_back(samples[i]);
      train_y.push_back(labels[i]);
      if (labels[i] == Label::Troll) minority.push_back(samples[i]);
      else ++majority;
    }
    if (smote && !minority.empty() && minority.size() < majority) {
      SmoteConfig cfg = *smote;
      cfg.seed = derive_seed(smote->seed, "smote-fold-" + std::to_string(f));
      for (auto& s : smote_oversample(minority, majority, cfg)) {
        train_x.push_back(std::move(s));
        train_y.push_back(Label::Troll);
      }
    }
    Hyperparams fold_hp = hp;
    fold_hp.seed = derive_seed(hp.seed, "svm-fold-" + std::to_string(f));
    const LinearModel model = train(train_x, train_y, fold_hp);

    std::vector<Label> predicted;
    std::vector<Label> actual;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (fold[i] != f) continue;
      predicted.push_back(classify(model, samples[i]));
      actual.push_back(labels[i]);
    }
    result.folds[f] = compute_metrics(predicted, actual);
  });

  for (const auto& m : result.folds) {
    result.mean.accuracy += m.accuracy;
    result.mean.precision += m.precision;
    result.mean.recall += m.recall;
    result.mean.f1 += m.f1;
    result.mean.confusion.tp += m.confusion.tp;
    result.mean.confusion.fp += m.confusion.fp;
    result.mean.confusion.fn += m.confusion.fn;
    result.mean.confusion.tn += m.confusion.tn;
  }
  const double kd = static_cast<double>(k);
  result.mean.accuracy /= kd;
  result.mean.precision /= kd;
  result.mean.recall /= kd;
  result.mean.f1 /= kd;
  return result;
}

std::string serialize_model(const LinearModel& model) {
  nlohmann::ordered_json header;
  header["c"] = model.hyperparams.c;
  header["epochs"] = model.hyperparams.epochs;
  header["seed"] = model.hyperparams.seed;
  header["tolerance"] = model.hyperparams.tolerance;
  header["epochs_run"] = model.epochs_run;
  header["feature_space_fingerprint"] = hex64(model.feature_space_fingerprint);
  header["provenance"] = nlohmann::ordered_json::parse(model.provenance);
  const std::string header_text = header.dump();

  std::string out(kModelMagic, sizeof kModelMagic);
  put_u32(out, kModelVersion);
  put_u32(out, static_cast<std::uint32_t>(header_text.size()));
  out += header_text;
  put_u64(out, model.weights.size());
  for (double w : model.weights) put_u64(out, std::bit_cast<std::uint64_t>(w));
  put_u64(out, std::bit_cast<std::uint64_t>(model.bias));
  put_u64(out, fnv1a(out));
  return out;
}

LinearModel deserialize_model(std::string_view bytes) {
  ByteReader reader(bytes);
  if (reader.take(sizeof kModelMagic) != std::string_view(kModelMagic, sizeof kModelMagic)) {
    throw Error(ErrorCode::CorruptFile, "not a model file");
  }
  const std::uint32_t version = reader.u32();
  if (version != kModelVersion) {
    throw Error(ErrorCode::VersionMismatch, "model format version " + std::to_string(version));
  }
  const std::uint32_t header_len = reader.u32();
  const std::string_view header_text = reader.take(header_len);
  const std::uint64_t dim = reader.u64();
  if (dim > reader.remaining() / 8) throw Error(ErrorCode::CorruptFile, "model file truncated");

  LinearModel model;
  model.weights.resize(dim);
  for (auto& w : model.weights) w = std::bit_cast<double>(reader.u64());
  model.bias = std::bit_cast<double>(reader.u64());
  const std::size_t body_end = reader.position();
  const std::uint64_t checksum = reader.u64();
  if (reader.remaining() != 0) throw Error(ErrorCode::CorruptFile, "trailing bytes after model");
  if (checksum != fnv1a(bytes.substr(0, body_end))) {
    throw Error(ErrorCode::CorruptFile, "model checksum mismatch");
  }
  try {
    const auto header = nlohmann::ordered_json::parse(header_text);
    model.hyperparams.c = header.at("c").get<double>();
    model.hyperparams.epochs = header.at("epochs").get<std::size_t>();
    model.hyperparams.seed = header.at("seed").get<std::uint64_t>();
    model.hyperparams.tolerance = header.at("tolerance").get<double>();
    model.epochs_run = header.at("epochs_run").get<std::size_t>();
    model.feature_space_fingerprint =
        parse_hex64(header.at("feature_space_fingerprint").get<std::string>());
    model.provenance = header.at("provenance").dump();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("model header: ") + e.what());
  }
  return model;
}

void save_model(const LinearModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write model " + path.string());
  const std::string bytes = serialize_model(model);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "failed writing model " + path.string());
}

LinearModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

}  // namespace trollguard
