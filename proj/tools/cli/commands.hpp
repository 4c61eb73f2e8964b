#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace mfa::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 2,
  kNumericalFailure = 3,
};

/// Entry point shared by the executable and the tests. Normal output goes to
/// `out`, diagnostics to `err`. Returns one of ExitCode.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Whitespace-separated "key value..." lines, '#' comments. Values keep their
/// internal spacing. Duplicate keys are an error.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Runs phantom -> degrade -> restore (+ Wiener) -> sharpen -> metrics from a
/// manifest. Relative paths in the manifest resolve against its directory.
void run_pipeline(const std::filesystem::path& manifest, std::ostream& out);

}  // namespace mfa::cli
