#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "trollguard/random.hpp"
#include "trollguard/targets.hpp"

namespace trollguard {

struct Transition {
  std::string next;
  std::size_t count = 0;
  double probability = 0.0;
};

/// First-order chain over verbatim chain-stream tokens (case and punctuation kept).
/// Counts are stored; probabilities are count / row total.
class MarkovChain {
 public:
  static MarkovChain build(std::span<const std::vector<std::string>> streams);

  /// Counts every adjacent pair of one stream.
  void add_stream(std::span<const std::string> stream);
  void merge(const MarkovChain& other);

  bool has_state(std::string_view state) const;
  /// Sorted by next token; empty for an unknown state.
  std::vector<Transition> transitions(std::string_view state) const;
  double probability(std::string_view from, std::string_view to) const;
  /// Weighted draw from the state's row; nullopt for an unknown state.
  std::optional<std::string> sample(std::string_view state, Rng& rng) const;

  std::size_t state_count() const noexcept { return rows_.size(); }
  std::size_t pair_count() const noexcept;
  std::size_t trained_tokens() const noexcept { return trained_tokens_; }

  std::string to_json() const;
  static MarkovChain from_json(std::string_view text);
  std::uint64_t fingerprint() const;

  std::string provenance = "{}";  // opaque JSON object

 private:
  struct Row {
    std::map<std::string, std::size_t, std::less<>> next;
    std::size_t total = 0;
  };
  std::map<std::string, Row, std::less<>> rows_;
  std::size_t trained_tokens_ = 0;
};

void save_chain(const MarkovChain& chain, const std::filesystem::path& path);
MarkovChain load_chain(const std::filesystem::path& path);

/// Decides whether a chain-stream token is a target: text targets match the
/// lowercased, punctuation-stripped token ('@' removed); hashtag targets match
/// '#'-prefixed tokens by normalised hashtag body. URLs never match.
class TargetMatcher {
 public:
  explicit TargetMatcher(const TargetWordList& targets);
  bool matches(std::string_view token) const;
  bool empty() const noexcept { return text_.empty() && hashtags_.empty(); }

 private:
  std::unordered_set<std::string> text_;
  std::unordered_set<std::string> hashtags_;
};

enum class EditAction { Replaced, Removed };

struct Edit {
  std::size_t position = 0;    // index in the input stream
  std::string original;
  EditAction action = EditAction::Removed;
  std::string sampled;         // chain state drawn, verbatim (Replaced only)
  std::string rendered;        // token written to the output (Replaced only)
  std::string preceding;       // state the draw was conditioned on; empty if none

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct RewriteResult {
  std::vector<std::string> tokens;
  std::vector<Edit> trace;
};

/// Redraws allowed after a candidate turns out to be a target itself.
inline constexpr std::size_t kMaxRedraws = 10;

/// Replaces or removes every target occurrence, left to right. The preceding
/// state is read from the output built so far. The replacement keeps the drawn
/// state's body and takes over the original token's trailing punctuation.
RewriteResult rewrite(std::span<const std::string> tokens, const TargetMatcher& targets,
                      const MarkovChain& chain, std::uint64_t seed);

/// Trailing punctuation moved from `original` onto the drawn state.
std::string render_replacement(std::string_view sampled, std::string_view original);

}  // namespace trollguard
