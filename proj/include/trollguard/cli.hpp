#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace trollguard::cli {

inline constexpr std::string_view kToolVersion = "1.0.0";

/// Name of the environment variable pointing at a directory with rules.json,
/// stoplist.txt, lexicon.tsv and negators.txt overrides.
inline constexpr std::string_view kDataDirEnv = "TROLLGUARD_DATA";

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kDataError = 2, kInternalError = 3 };

/// Runs one subcommand. args excludes the program name. Human-readable
/// progress and errors go to err; data only ever goes to files.
int dispatch(std::span<const std::string> args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace trollguard::cli
