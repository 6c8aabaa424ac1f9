#pragma once

#include "porestab/config.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace porestab {

/// Command-line overrides applied on top of the config file.
struct CliOverrides {
  std::optional<std::string> output_dir;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

/// Scenario entry points. Each writes its result files plus manifest.json into
/// the output directory; module errors propagate (partial outputs are marked
/// incomplete in the manifest before rethrowing).
void cmd_analyze(const RunConfig& cfg, const CliOverrides& cli);
void cmd_simulate(const RunConfig& cfg, const CliOverrides& cli);
void cmd_poincare(const RunConfig& cfg, const CliOverrides& cli);
void cmd_sweep(const RunConfig& cfg, const CliOverrides& cli);

/// Dispatches on cfg.scenario.
void run_scenario(const RunConfig& cfg, const CliOverrides& cli);

} // namespace porestab
