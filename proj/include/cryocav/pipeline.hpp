#pragma once

#include "cryocav/config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cryocav {

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::optional<std::uint64_t> seed; // overrides [run] seed
  unsigned parallel = 1;             // worker threads for Monte-Carlo commands
  std::filesystem::path base_dir = "."; // relative [io] paths resolve here
};

struct RunOutcome {
  int exit_code = 0; // 0 ok, 1 validation or I/O, 2 numerical
  std::string summary;  // key = value lines
  std::string error;    // "error: <kind>: <message>" when exit_code != 0
  std::vector<std::filesystem::path> files;
};

std::span<const std::string_view> command_names();
std::string usage_text();

/// Executes one pipeline command. Never throws; failures are mapped to exit
/// codes with a one-line machine-readable error.
RunOutcome run(std::string_view command, RunConfig config, const RunOptions& options);

} // namespace cryocav
