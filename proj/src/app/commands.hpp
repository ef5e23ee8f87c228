#pragma once

#include <iosfwd>
#include <optional>
#include <string_view>

#include "app/config.hpp"

namespace stentflow {

enum class Command { Mesh, Cell, Solve, Homog, Converge };

std::string_view to_string(Command c);
std::optional<Command> command_from_string(std::string_view name);

struct RunOptions {
  int threads = 1;
  bool skip_varkappa = false;
  bool vtk = false;
  bool dry_run = false;  // print the plan, solve nothing
};

/// Runs one subcommand, writing its files under config.output_dir and a short summary to `out`.
/// Returns 0 on success and 1 when a numerical gate fails (identity checks for cell, slope bands
/// for converge, non-convergence for solve). Throws ConfigError for bad inputs and
/// NumericalError for pipeline failures.
int run_command(Command command, const RunConfig& config, const RunOptions& options, std::ostream& out);

/// Acceptance bands on the fitted slopes; the empty string when all hold.
std::string slope_band_violations(const StudyResult& r);

}  // namespace stentflow
