#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "json.hpp"

namespace mbkdv::cli {

/// Stable exit codes for scripting.
enum ExitCode : int { kOk = 0, kUsage = 1, kDivergence = 2, kVerifyFailed = 3, kContractionFailed = 4 };

inline constexpr const char* kToolVersion = "0.1.0";

struct Options {
  std::string command;  // simulate | verify | contract | bounds | converge
  std::string suite = "all";
  std::filesystem::path config_path;
  std::filesystem::path out_dir = "mbkdv_out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool quiet = false;
};

/// Parses argv and runs one command. Usage and config errors, including
/// unknown suites and missing files, return kUsage.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Runs an already parsed command. Writes the outputs into opts.out_dir
/// through a staging directory, manifest last, and prints the one-line
/// `status=<ok|fail> key=value ...` summary on `out`.
int execute(const Options& opts, std::ostream& out, std::ostream& err);

}  // namespace mbkdv::cli
