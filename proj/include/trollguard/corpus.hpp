#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace trollguard {

enum class TweetKind { Original, Retweet, Reply };
enum class Label { Troll, NonTroll };

std::string_view to_string(TweetKind kind) noexcept;
std::string_view to_string(Label label) noexcept;
std::optional<TweetKind> parse_kind(std::string_view text) noexcept;

struct TweetRecord {
  std::string id;
  std::string text;
  TweetKind kind = TweetKind::Original;
  std::vector<std::string> hashtags;  // no leading '#', no whitespace
  std::optional<Label> label;

  friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct TokenizedTweet {
  std::vector<std::string> model_tokens;
  std::vector<std::string> chain_tokens;
  std::vector<std::string> hashtag_tokens;
  double cap_ratio = 0.0;
  TweetKind kind = TweetKind::Original;
};

using Stoplist = std::unordered_set<std::string>;

enum class CorpusFormat { Csv, Jsonl };

/// Picks the format from the extension: ".jsonl"/".ndjson" are JSONL, anything else CSV.
CorpusFormat format_for(const std::filesystem::path& path) noexcept;

std::vector<TweetRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format);
std::vector<TweetRecord> read_csv(std::istream& in);
std::vector<TweetRecord> read_jsonl(std::istream& in);

void write_csv(std::ostream& out, std::span<const TweetRecord> records);
void write_jsonl(std::ostream& out, std::span<const TweetRecord> records);

/// One token per line; blank lines and '#'-prefixed lines are ignored.
Stoplist parse_stoplist(std::string_view text);
Stoplist load_stoplist(const std::filesystem::path& path);

TokenizedTweet tokenize(const TweetRecord& record, const Stoplist& stoplist);

/// Uppercase ASCII letters over all ASCII letters; 0 when there are none.
double capitalization_ratio(std::string_view text) noexcept;

std::vector<std::string> split_whitespace(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

// Token normalisation shared by the model stream and the rewriter's target matching.
std::string_view strip_punctuation(std::string_view token) noexcept;
std::string to_lower_ascii(std::string_view text);
bool is_url(std::string_view token) noexcept;

/// Lowercase hashtag body: '#' characters removed, surrounding punctuation stripped.
std::string normalize_hashtag(std::string_view token);

bool is_valid_utf8(std::string_view text) noexcept;

/// Whole file as bytes. Throws Io.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace trollguard
