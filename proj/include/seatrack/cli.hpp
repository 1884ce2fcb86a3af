#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace seatrack {

// Subcommand bodies behind the command-line front end. Each prints failures
// to stderr and returns a process exit status.

// Parses and validates the config, runs the scenario, and writes
// runlog.jsonl, summary.json, and config.json into out_dir. Nothing is
// written unless the config validates.
int cmd_run(const std::string& config_path, const std::string& out_dir,
            std::optional<std::uint64_t> seed_override);

// Reads a run log and writes report.json plus the CSV series into out_dir.
int cmd_report(const std::string& runlog_path, const std::string& out_dir, double radius);

// Parses and validates the config; reports the first problem found.
int cmd_validate(const std::string& config_path);

}  // namespace seatrack
