#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace trollguard {

enum class ErrorCode {
  MalformedRow,
  MissingColumn,
  EmptyCorpus,
  DimensionMismatch,
  EmptyMinority,
  SingleClass,
  FingerprintMismatch,
  LengthMismatch,
  Empty,
  VersionMismatch,
  CorruptFile,
  EmptySet,
  ConstantVector,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library surfaces as this exception type;
/// callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Corpus rows carry their 1-based line number so CLI diagnostics can point at the file.
class MalformedRowError : public Error {
 public:
  MalformedRowError(std::size_t line_no, const std::string& detail)
      : Error(ErrorCode::MalformedRow, "line " + std::to_string(line_no) + ": " + detail),
        line_no_(line_no) {}

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace trollguard
