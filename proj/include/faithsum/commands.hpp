#pragma once

#include <string>

#include "faithsum/config.hpp"

namespace faithsum {

// Runs one pipeline command; artifacts land in out_dir next to a
// manifest.txt recording the command, config hash and seeds. Throws on
// unknown commands, unknown config keys and missing inputs.
void run_command(const std::string& name, const ExperimentConfig& config,
                 const std::string& out_dir);

}  // namespace faithsum
