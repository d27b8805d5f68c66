/**
 * @file  cli.hpp
 * @brief Subcommand dispatch and the kcsim command-line entry point.
 *
 * Output files (docs/output.md):
 *   ode      ode_trajectory.csv, ode_equilibria.csv
 *   macro    macro_snapshots.csv
 *   kinetic  kinetic_snapshots.csv
 *   converge convergence.csv
 *   coeffs   coefficients.csv
 */
#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "kcsim/config.hpp"

namespace kcsim {

/// Runs one subcommand and returns the paths written. Module errors propagate.
std::vector<std::filesystem::path> dispatch(Subcommand sub, const RunConfig& config, std::ostream& log);

/**
 * `kcsim {ode|macro|kinetic|converge|coeffs} --config <path> [--out <dir>]`.
 * Returns the process exit status. Failures print one line to err:
 *   error kind=<Kind> code=<n> message="<text>"
 */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kcsim
