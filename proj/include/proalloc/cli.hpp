#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace proalloc::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 1,
  kDataError = 2,
  kInvariantFailure = 3,
};

// Environment variable naming the default dataset path.
inline constexpr const char* kDatasetEnv = "PROALLOC_DATASET";

// Entry point behind the `proalloc` binary. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Writes `contents` to a sibling temporary file and renames it over `path`.
void write_atomically(const std::string& path, const std::string& contents);

}  // namespace proalloc::cli
