#pragma once

#include "finslerkit/run_config.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace finslerkit {

/// Exit codes of every command.
enum ExitCode : int { kExitPass = 0, kExitNegative = 1, kExitConfig = 2, kExitInconclusive = 3 };

int cmd_validate_norm(const RunConfig& config, std::ostream& log);
int cmd_smooth(const RunConfig& config, std::ostream& log);
int cmd_check_hilbert(const RunConfig& config, std::ostream& log);
int cmd_quotient(const RunConfig& config, std::ostream& log);
int cmd_distance(const RunConfig& config, std::ostream& log);

/// Loads the config, runs the command and maps failures onto exit codes:
/// bad input or parameters -> 2, numerical breakdown -> 3.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                std::optional<std::filesystem::path> out, std::optional<std::uint64_t> seed, std::ostream& log);

/// Writes `content` to `path` through a temporary file and a rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace finslerkit
