#pragma once

#include <string>

#include "sface/config.hpp"

namespace sface {

// Subcommand bodies. Each returns the primary output document (JSON or CSV)
// and writes it to cfg.out when that is a path; side outputs (boundary JSON,
// replicate dumps) are written next to it. Errors are thrown; the CLI maps
// them onto exit codes.
std::string cmd_estimate(const RunConfig& cfg);
std::string cmd_sensitivity(const RunConfig& cfg);
std::string cmd_simulate(const RunConfig& cfg);
std::string cmd_profiles(const RunConfig& cfg);

void write_output(const RunConfig& cfg, const std::string& text);

}  // namespace sface
