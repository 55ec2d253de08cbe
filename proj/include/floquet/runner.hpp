#pragma once

// Command dispatch for the floquet CLI: runs one command on a RunConfig, writes
// the JSON run record and CSV traces into an output directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "floquet/config.hpp"

namespace floquet {

enum ExitCode : int { exit_ok = 0, exit_config = 2, exit_assumption = 3, exit_numerical = 4 };

inline constexpr int kRecordSchemaVersion = 1;

struct CommandOutcome {
  nlohmann::json record;
  int exit_code = exit_ok;
  std::vector<std::filesystem::path> files;
};

struct RunOverrides {
  std::optional<int> workers;
  std::optional<std::int64_t> horizon;
  std::int64_t dump_matrices = 0;  // samples of the first seed written to matrices.csv
};

bool known_command(std::string_view command);

/// Runs `command` and writes record_<command>.json plus its traces into
/// `out_dir`. Library errors are caught and mapped to exit codes; the record
/// is still written and carries the error.
CommandOutcome run_command(std::string_view command, RunConfig config, const std::filesystem::path& out_dir,
                           const RunOverrides& overrides = {});

/// The record without its "timing" member; equal across reruns of one config.
nlohmann::json record_payload(const nlohmann::json& record);

/// JSON number for finite values, "inf", "-inf" or "nan" otherwise.
nlohmann::json real_json(double x);

}  // namespace floquet
