#pragma once

#include "config.hpp"

#include <string>
#include <vector>

namespace ltk::cli {

enum ExitCode : int { kOk = 0, kFailed = 1, kConfigError = 2 };

int cmd_simulate(const RunConfig& cfg);
int cmd_validate(const RunConfig& cfg);
int cmd_bracket(const RunConfig& cfg);
int cmd_reduce(const RunConfig& cfg);
int cmd_flowcheck(const RunConfig& cfg);
int cmd_list(const RunConfig& cfg);

/// Parses `ltk <subcommand> [--config path] [flags]` and dispatches.
/// args[0] is the program name.
int run(const std::vector<std::string>& args);

}  // namespace ltk::cli
