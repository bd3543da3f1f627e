#include "trollguard/atd.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "trollguard/error.hpp"
#include "trollguard/hashing.hpp"

namespace trollguard {
namespace {

constexpr int kChainVersion = 1;

std::size_t trailing_punct_start(std::string_view token) noexcept {
  std::size_t end = token.size();
  while (end > 0 && strip_punctuation(token.substr(end - 1, 1)).empty()) --end;
  return end;
}

}  // namespace

MarkovChain MarkovChain::build(std::span<const std::vector<std::string>> streams) {
  MarkovChain chain;
  for (const auto& stream : streams) chain.add_stream(stream);
  return chain;
}

void MarkovChain::add_stream(std::span<const std::string> stream) {
  trained_tokens_ += stream.size();
  for (std::size_t i = 0; i + 1 < stream.size(); ++i) {
    auto& row = rows_[stream[i]];
    ++row.next[stream[i + 1]];
    ++row.total;
  }
}

void MarkovChain::merge(const MarkovChain& other) {
  trained_tokens_ += other.trained_tokens_;
  for (const auto& [state, row] : other.rows_) {
    auto& mine = rows_[state];
    for (const auto& [next, count] : row.next) mine.next[next] += count;
    mine.total += row.total;
  }
}

bool MarkovChain::has_state(std::string_view state) const { return rows_.find(state) != rows_.end(); }

std::vector<Transition> MarkovChain::transitions(std::string_view state) const {
  std::vector<Transition> out;
  const auto it = rows_.find(state);
  if (it == rows_.end()) return out;
  const double total = static_cast<double>(it->second.total);
  for (const auto& [next, count] : it->second.next) {
    out.push_back({next, count, static_cast<double>(count) / total});
  }
  return out;
}

double MarkovChain::probability(std::string_view from, std::string_view to) const {
  const auto it = rows_.find(from);
  if (it == rows_.end()) return 0.0;
  const auto jt = it->second.next.find(to);
  if (jt == it->second.next.end()) return 0.0;
  return static_cast<double>(jt->second) / static_cast<double>(it->second.total);
}

std::optional<std::string> MarkovChain::sample(std::string_view state, Rng& rng) const {
  const auto it = rows_.find(state);
  if (it == rows_.end() || it->second.total == 0) return std::nullopt;
  std::size_t ticket = static_cast<std::size_t>(rng.below(it->second.total));
  for (const auto& [next, count] : it->second.next) {
    if (ticket < count) return next;
    ticket -= count;
  }
  return it->second.next.rbegin()->first;
}

std::size_t MarkovChain::pair_count() const noexcept {
  std::size_t n = 0;
  for (const auto& [state, row] : rows_) n += row.next.size();
  return n;
}

std::string MarkovChain::to_json() const {
  nlohmann::ordered_json doc;
  doc["format"] = "trollguard.markov_chain";
  doc["version"] = kChainVersion;
  doc["provenance"] = nlohmann::ordered_json::parse(provenance);
  doc["trained_tokens"] = trained_tokens_;
  auto& states = doc["states"] = nlohmann::ordered_json::object();
  for (const auto& [state, row] : rows_) {
    auto& next = states[state] = nlohmann::ordered_json::object();
    for (const auto& [token, count] : row.next) next[token] = count;
  }
  return doc.dump() + "\n";
}

MarkovChain MarkovChain::from_json(std::string_view text) {
  MarkovChain chain;
  try {
    const auto doc = nlohmann::ordered_json::parse(text);
    if (doc.at("format").get<std::string>() != "trollguard.markov_chain") {
      throw Error(ErrorCode::CorruptFile, "not a chain file");
    }
    if (doc.at("version").get<int>() != kChainVersion) {
      throw Error(ErrorCode::VersionMismatch, "unsupported chain version");
    }
    chain.provenance = doc.at("provenance").dump();
    chain.trained_tokens_ = doc.at("trained_tokens").get<std::size_t>();
    for (const auto& [state, next] : doc.at("states").items()) {
      auto& row = chain.rows_[state];
      for (const auto& [token, count] : next.items()) {
        const auto c = count.get<std::size_t>();
        if (c == 0) throw Error(ErrorCode::CorruptFile, "zero transition count");
        row.next[token] = c;
        row.total += c;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptFile, std::string("chain JSON: ") + e.what());
  }
  return chain;
}

std::uint64_t MarkovChain::fingerprint() const {
  std::uint64_t h = kFnvOffset;
  for (const auto& [state, row] : rows_) {
    h = fnv1a(state, h);
    h = fnv1a(std::string_view("\x1f", 1), h);
    for (const auto& [token, count] : row.next) {
      h = fnv1a(token, h);
      h = fnv1a(std::to_string(count), h);
      h = fnv1a(std::string_view("\x1e", 1), h);
    }
  }
  return h;
}

void save_chain(const MarkovChain& chain, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write chain " + path.string());
  out << chain.to_json();
}

MarkovChain load_chain(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open chain " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return MarkovChain::from_json(buffer.str());
}

TargetMatcher::TargetMatcher(const TargetWordList& targets) {
  for (const auto& t : targets.entries) {
    if (t.channel == Channel::Hashtag) {
      hashtags_.insert(normalize_hashtag(t.token));
    } else {
      text_.insert(to_lower_ascii(strip_punctuation(t.token)));
    }
  }
}

bool TargetMatcher::matches(std::string_view token) const {
  if (token.empty() || is_url(token)) return false;
  if (token.front() == '#') return hashtags_.contains(normalize_hashtag(token));
  while (!token.empty() && token.front() == '@') token.remove_prefix(1);
  const std::string key = to_lower_ascii(strip_punctuation(token));
  return !key.empty() && text_.contains(key);
}

std::string render_replacement(std::string_view sampled, std::string_view original) {
  const std::size_t body_end = trailing_punct_start(sampled);
  if (body_end == 0) return std::string(sampled);
  std::string out(sampled.substr(0, body_end));
  const std::size_t tail = trailing_punct_start(original);
  if (tail > 0) out += original.substr(tail);
  return out;
}

RewriteResult rewrite(std::span<const std::string> tokens, const TargetMatcher& targets,
                      const MarkovChain& chain, std::uint64_t seed) {
  RewriteResult result;
  result.tokens.reserve(tokens.size());
  Rng rng(seed);
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const std::string& token = tokens[pos];
    if (!targets.matches(token)) {
      result.tokens.push_back(token);
      continue;
    }
    Edit edit;
    edit.position = pos;
    edit.original = token;
    if (!result.tokens.empty()) {
      edit.preceding = result.tokens.back();
      for (std::size_t draw = 0; draw <= kMaxRedraws; ++draw) {
        auto candidate = chain.sample(edit.preceding, rng);
        if (!candidate) break;
        if (targets.matches(*candidate)) continue;
        edit.action = EditAction::Replaced;
        edit.sampled = std::move(*candidate);
        edit.rendered = render_replacement(edit.sampled, token);
        break;
      }
    }
    if (edit.action == EditAction::Replaced) result.tokens.push_back(edit.rendered);
    result.trace.push_back(std::move(edit));
  }
  return result;
}

}  // namespace trollguard
