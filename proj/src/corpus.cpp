#include "trollguard/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "json.hpp"
#include "trollguard/error.hpp"

namespace trollguard {
namespace {

bool is_space(char c) noexcept {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_punct(char c) noexcept {
  const auto u = static_cast<unsigned char>(c);
  return (u >= 0x21 && u <= 0x2f) || (u >= 0x3a && u <= 0x40) || (u >= 0x5b && u <= 0x60) ||
         (u >= 0x7b && u <= 0x7e);
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::optional<Label> parse_label(std::string_view text, std::size_t line_no) {
  const std::string lowered = to_lower_ascii(trim(text));
  if (lowered.empty()) return std::nullopt;
  if (lowered == "troll") return Label::Troll;
  if (lowered == "nontroll") return Label::NonTroll;
  throw MalformedRowError(line_no, "unknown label '" + std::string(text) + "'");
}

std::string clean_hashtag(std::string_view raw, std::size_t line_no) {
  std::string tag = trim(raw);
  while (!tag.empty() && tag.front() == '#') tag.erase(tag.begin());
  if (tag.find('#') != std::string::npos ||
      std::any_of(tag.begin(), tag.end(), [](char c) { return is_space(c); })) {
    throw MalformedRowError(line_no, "invalid hashtag '" + std::string(raw) + "'");
  }
  return tag;
}

std::vector<std::string> split_hashtag_field(std::string_view field, std::size_t line_no) {
  std::vector<std::string> tags;
  std::size_t start = 0;
  while (start <= field.size()) {
    const std::size_t end = std::min(field.find(';', start), field.size());
    std::string tag = clean_hashtag(field.substr(start, end - start), line_no);
    if (!tag.empty()) tags.push_back(std::move(tag));
    start = end + 1;
  }
  return tags;
}

TweetKind require_kind(std::string_view text, std::size_t line_no) {
  if (auto kind = parse_kind(trim(text))) return *kind;
  throw MalformedRowError(line_no, "unknown tweet kind '" + std::string(text) + "'");
}

// RFC 4180 reader. Quoted fields may span lines; the reported line number is
// the line where the record starts.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  bool next(std::vector<std::string>& fields, std::size_t& start_line) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    start_line = line_;
    std::string field;
    bool quoted = false;
    bool field_was_quoted = false;
    while (true) {
      if (c == EOF) {
        if (quoted) throw MalformedRowError(start_line, "unterminated quoted field");
        fields.push_back(std::move(field));
        return true;
      }
      const char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
      } else if (ch == '"') {
        if (!field.empty() || field_was_quoted) {
          throw MalformedRowError(start_line, "stray quote inside unquoted field");
        }
        quoted = true;
        field_was_quoted = true;
      } else if (ch == ',') {
        fields.push_back(std::move(field));
        field.clear();
        field_was_quoted = false;
      } else if (ch == '\r' && in_.peek() == '\n') {
        // swallow; the '\n' ends the record
      } else if (ch == '\n') {
        ++line_;
        fields.push_back(std::move(field));
        return true;
      } else {
        if (field_was_quoted) throw MalformedRowError(start_line, "text after closing quote");
        field.push_back(ch);
      }
      c = in_.get();
    }
  }

 private:
  std::istream& in_;
  std::size_t line_ = 1;
};

bool needs_quotes(std::string_view s) {
  if (s.empty()) return false;
  if (is_space(s.front()) || is_space(s.back())) return true;
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

void write_field(std::ostream& out, std::string_view s) {
  if (!needs_quotes(s)) {
    out << s;
    return;
  }
  out << '"';
  for (char c : s) {
    if (c == '"') out << '"';
    out << c;
  }
  out << '"';
}

}  // namespace

std::string_view to_string(TweetKind kind) noexcept {
  switch (kind) {
    case TweetKind::Original: return "original";
    case TweetKind::Retweet: return "retweet";
    case TweetKind::Reply: return "reply";
  }
  return "original";
}

std::string_view to_string(Label label) noexcept {
  return label == Label::Troll ? "troll" : "nontroll";
}

std::optional<TweetKind> parse_kind(std::string_view text) noexcept {
  const std::string lowered = to_lower_ascii(text);
  if (lowered == "original") return TweetKind::Original;
  if (lowered == "retweet") return TweetKind::Retweet;
  if (lowered == "reply") return TweetKind::Reply;
  return std::nullopt;
}

CorpusFormat format_for(const std::filesystem::path& path) noexcept {
  const std::string ext = to_lower_ascii(path.extension().string());
  return (ext == ".jsonl" || ext == ".ndjson") ? CorpusFormat::Jsonl : CorpusFormat::Csv;
}

std::vector<TweetRecord> load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open corpus " + path.string());
  return format == CorpusFormat::Csv ? read_csv(in) : read_jsonl(in);
}

std::vector<TweetRecord> read_csv(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  std::vector<TweetRecord> records;
  if (!reader.next(fields, line_no)) return records;

  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    std::string name = to_lower_ascii(trim(fields[i]));
    if (i == 0 && name.rfind("\xef\xbb\xbf", 0) == 0) name.erase(0, 3);
    column.emplace(std::move(name), i);
  }
  for (const char* required : {"id", "text", "kind"}) {
    if (!column.contains(required)) {
      throw Error(ErrorCode::MissingColumn, std::string("corpus header lacks '") + required + "'");
    }
  }
  const std::size_t width = fields.size();
  const auto hashtags_col = column.find("hashtags");
  const auto label_col = column.find("label");

  while (reader.next(fields, line_no)) {
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != width) {
      throw MalformedRowError(line_no, "expected " + std::to_string(width) + " fields, got " +
                                           std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      if (!is_valid_utf8(f)) throw MalformedRowError(line_no, "invalid UTF-8");
    }
    TweetRecord rec;
    rec.id = fields[column["id"]];
    rec.text = fields[column["text"]];
    rec.kind = require_kind(fields[column["kind"]], line_no);
    if (hashtags_col != column.end()) {
      rec.hashtags = split_hashtag_field(fields[hashtags_col->second], line_no);
    }
    if (label_col != column.end()) rec.label = parse_label(fields[label_col->second], line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TweetRecord> read_jsonl(std::istream& in) {
  using nlohmann::json;
  std::vector<TweetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (!is_valid_utf8(line)) throw MalformedRowError(line_no, "invalid UTF-8");
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw MalformedRowError(line_no, e.what());
    }
    if (!obj.is_object()) throw MalformedRowError(line_no, "not a JSON object");
    auto string_field = [&](const char* name, bool required) -> std::string {
      auto it = obj.find(name);
      if (it == obj.end() || it->is_null()) {
        if (required) throw MalformedRowError(line_no, std::string("missing '") + name + "'");
        return {};
      }
      if (!it->is_string()) throw MalformedRowError(line_no, std::string("'") + name + "' not a string");
      return it->get<std::string>();
    };
    TweetRecord rec;
    rec.id = string_field("id", true);
    rec.text = string_field("text", true);
    const std::string kind = string_field("kind", false);
    rec.kind = kind.empty() ? TweetKind::Original : require_kind(kind, line_no);
    if (auto it = obj.find("hashtags"); it != obj.end() && !it->is_null()) {
      if (it->is_string()) {
        rec.hashtags = split_hashtag_field(it->get<std::string>(), line_no);
      } else if (it->is_array()) {
        for (const auto& tag : *it) {
          if (!tag.is_string()) throw MalformedRowError(line_no, "hashtag not a string");
          std::string cleaned = clean_hashtag(tag.get<std::string>(), line_no);
          if (!cleaned.empty()) rec.hashtags.push_back(std::move(cleaned));
        }
      } else {
        throw MalformedRowError(line_no, "'hashtags' must be an array or string");
      }
    }
    rec.label = parse_label(string_field("label", false), line_no);
    records.push_back(std::move(rec));
  }
  return records;
}

void write_csv(std::ostream& out, std::span<const TweetRecord> records) {
  out << "id,text,kind,hashtags,label\n";
  for (const auto& rec : records) {
    write_field(out, rec.id);
    out << ',';
    write_field(out, rec.text);
    out << ',' << to_string(rec.kind) << ',';
    std::string tags;
    for (std::size_t i = 0; i < rec.hashtags.size(); ++i) {
      if (i) tags += ';';
      tags += rec.hashtags[i];
    }
    write_field(out, tags);
    out << ',';
    if (rec.label) out << to_string(*rec.label);
    out << '\n';
  }
}

void write_jsonl(std::ostream& out, std::span<const TweetRecord> records) {
  for (const auto& rec : records) {
    nlohmann::ordered_json obj;
    obj["id"] = rec.id;
    obj["text"] = rec.text;
    obj["kind"] = to_string(rec.kind);
    obj["hashtags"] = rec.hashtags;
    if (rec.label) obj["label"] = to_string(*rec.label);
    out << obj.dump() << '\n';
  }
}

Stoplist parse_stoplist(std::string_view text) {
  Stoplist stoplist;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    std::string token = trim(line);
    if (token.empty() || token.front() == '#') continue;
    stoplist.insert(to_lower_ascii(token));
  }
  return stoplist;
}

Stoplist load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open stoplist " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_stoplist(buffer.str());
}

TokenizedTweet tokenize(const TweetRecord& record, const Stoplist& stoplist) {
  TokenizedTweet out;
  out.kind = record.kind;
  out.cap_ratio = capitalization_ratio(record.text);
  out.chain_tokens = split_whitespace(record.text);

  auto add_hashtag = [&](std::string tag) {
    if (tag.empty()) return;
    if (std::find(out.hashtag_tokens.begin(), out.hashtag_tokens.end(), tag) ==
        out.hashtag_tokens.end()) {
      out.hashtag_tokens.push_back(std::move(tag));
    }
  };
  for (const auto& tag : record.hashtags) add_hashtag(to_lower_ascii(tag));

  for (const auto& raw : out.chain_tokens) {
    std::string_view token = raw;
    if (is_url(token)) continue;
    if (token.front() == '#') {
      add_hashtag(normalize_hashtag(token));
      continue;
    }
    while (!token.empty() && token.front() == '@') token.remove_prefix(1);
    std::string lowered = to_lower_ascii(strip_punctuation(token));
    if (lowered.empty() || stoplist.contains(lowered)) continue;
    out.model_tokens.push_back(std::move(lowered));
  }
  return out;
}

double capitalization_ratio(std::string_view text) noexcept {
  std::size_t upper = 0;
  std::size_t letters = 0;
  for (char c : text) {
    if (c >= 'A' && c <= 'Z') {
      ++upper;
      ++letters;
    } else if (c >= 'a' && c <= 'z') {
      ++letters;
    }
  }
  return letters == 0 ? 0.0 : static_cast<double>(upper) / static_cast<double>(letters);
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string_view strip_punctuation(std::string_view token) noexcept {
  while (!token.empty() && is_punct(token.front())) token.remove_prefix(1);
  while (!token.empty() && is_punct(token.back())) token.remove_suffix(1);
  return token;
}

std::string to_lower_ascii(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_url(std::string_view token) noexcept {
  const std::string lowered = to_lower_ascii(token.substr(0, 8));
  return lowered.rfind("http://", 0) == 0 || lowered.rfind("https://", 0) == 0;
}

std::string normalize_hashtag(std::string_view token) {
  std::string out = to_lower_ascii(strip_punctuation(token));
  std::erase(out, '#');
  return out;
}

bool is_valid_utf8(std::string_view text) noexcept {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const auto c = static_cast<unsigned char>(text[i]);
    std::size_t extra = 0;
    std::uint32_t cp = 0;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= n) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      const auto cc = static_cast<unsigned char>(text[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    static constexpr std::uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10ffff || (cp >= 0xd800 && cp <= 0xdfff)) return false;
    i += extra + 1;
  }
  return true;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace trollguard
