#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "aftershock/config.hpp"

namespace aftershock {

enum class Command { ingest, calibrate, simulate, omori, predict, report };

std::optional<Command> parse_command(const std::string& name);
std::string command_name(Command command);

/// Runs one subcommand. Every output file starts with a reference to the
/// run manifest `manifest_<command>.json` written next to it. Errors are
/// reported on `err` and mapped to exit codes (2 usage, 3 data, 4 fit).
int run(Command command, const RunConfig& config, std::ostream& log, std::ostream& err);

/// Same, throwing instead of mapping errors to exit codes.
void run_or_throw(Command command, const RunConfig& config, std::ostream& log);

}  // namespace aftershock
