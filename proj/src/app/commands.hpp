#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "app/config.hpp"
#include "kdg/grid.hpp"
#include "kdg/report.hpp"

namespace kdg::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitCheckFailed = 3;

const std::vector<std::string>& command_names();

struct CommandResult {
  Json body;
  std::vector<std::string> failures;  ///< violated invariants, with witnesses
};

/// Runs one subcommand at one refinement level (grid sizes times 2^level).
CommandResult run_level(const std::string& name, const RunConfig& cfg, int level);

/// Runs the ladder 0..cfg.refine, writes <out>/<name>.json and returns the
/// exit status. Errors are reported on err.
int run_subcommand(const std::string& name, const RunConfig& cfg, std::ostream& err);

/// Solver-generated field on the configured grid, clipped to [0, 1].
GridField solver_field(const RunConfig& cfg, int level, double t_lo, double t_hi, std::size_t nv_override = 0);

}  // namespace kdg::app
