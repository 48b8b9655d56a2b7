#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "qndepp_cli/config.hpp"

namespace qndepp::cli {

const std::vector<std::string>& command_names();

/// Runs one subcommand, writing CSVs and manifest.yaml under config.out.
/// Summary lines go to `out`, warnings to `err`. Returns the exit status.
int run_command(const std::string& name, RunConfig config, std::ostream& out, std::ostream& err);

}  // namespace qndepp::cli
