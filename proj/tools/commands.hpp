#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tgeom/config.hpp"

namespace tgeom::cli {

inline constexpr const char* kToolName = "tgeom";
inline constexpr const char* kToolVersion = "0.1.0";

enum ExitCode : int { ok = 0, config_error = 2, evaluation_error = 3, empty_result = 4 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> format;
};

/// Applies flag overrides and fills defaults (seed, output) into the config.
Json resolve_config(Json config, const Overrides& overrides);

struct CommandResult {
  int exit_code = ok;
  Json report;
  /// Additional files written next to the main output: (suffix, content).
  std::vector<std::pair<std::string, std::string>> side_files;
  std::string error;
};

/// Runs one subcommand on a resolved config. Never throws; failures map to
/// exit codes with a message in `error`.
CommandResult run_command(const std::string& command, const Json& config);

/// JSON (indented) or flattened "key,value" CSV.
std::string render(const Json& report, const std::string& format);

const std::vector<std::string>& command_names();

}  // namespace tgeom::cli
