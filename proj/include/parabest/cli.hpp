#pragma once

// Command-line front end: argument parsing and execution of the run,
// preset and check subcommands.

#include "parabest/benchmark.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace parabest {

inline constexpr const char *kVersion = "0.1.0";

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1, ///< a property suite or criterion failed
  kExitUsage = 2,       ///< unknown flag, invalid value, bad config file
  kExitIo = 3,          ///< output directory refused or not writable
  kExitRuntime = 4,     ///< numerical or internal failure
};

enum class Command { run, preset, check };

struct CliConfig {
  Command command = Command::run;
  RunConfig run;
  std::filesystem::path out_dir;
  std::string out_source; ///< "flag", "env" or "default"
  std::string config_file;
  std::string schedule_file;
  bool force = false;
  int jobs = 1;
};

struct ParseOutcome {
  std::optional<CliConfig> config;
  int exit_code = kExitOk; ///< meaningful when config is empty
  std::string message;     ///< usage/help text or diagnostic
};

ParseOutcome parse_args(int argc, const char *const *argv);

/// Applies one `key=value` setting (the config-file syntax). Throws
/// InvalidArgument for unknown keys or invalid values.
void apply_setting(CliConfig &config, const std::string &key, const std::string &value);
void apply_config_file(CliConfig &config, std::istream &is);

/// Runs the configured command and writes the artifacts. Progress goes to
/// `out`, diagnostics to `err`.
int execute(const CliConfig &config, std::ostream &out, std::ostream &err);

int cli_main(int argc, const char *const *argv);

} // namespace parabest
