#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "analysis/analysis.hpp"

namespace stentflow {

inline constexpr const char* kVersion = "0.1.0";

/// Everything a subcommand needs, parsed from a flat "key = value" file.
///
/// Keys and defaults (the defaults reproduce the reference collateral case):
///   case = collateral                 collateral | aneurysm
///   eps = 1/8                         single-eps commands (mesh, solve, homog); 0 allowed in homog
///   eps_list = 1/4, 1/8, 1/16         converge
///   p_in = 2, p_out1 = 0, p_out2 = -1
///   obstacle = disk                   disk | none
///   obstacle.cx = 0.5, obstacle.cy = 0.25, obstacle.r = 0.1875
///   strip.L = 10, strip.h_near = 0.03, strip.h_far = 0.25, strip.h_obstacle = 0,
///   strip.grading = 0.2, strip.near_halo = 0.6, strip.min_angle = 20
///   mesh.h = 0.05, mesh.obstacle_factor = 0.25, mesh.cells_per_period = 8,
///   mesh.corner_factor = 0.5, mesh.grading = 0.3, mesh.min_angle = 20,
///   mesh.h_sub = 0.05, mesh.h_sub_interface = 0.01
///   solver.method = uzawa_cg          uzawa_cg | direct
///   solver.inner = cholesky           cholesky | ic_cg
///   solver.schur = pressure_mass      pressure_mass | none
///   solver.outer_tol = 1e-10, solver.inner_tol = 1e-12,
///   solver.max_outer = 2000, solver.max_inner = 20000, solver.log = true
///   cell.identity_tol = 0.01          relative, energy and jump identities
///   cell.section_tol = 1e-6           absolute, beta2 and Upsilon2 section means
///   cell.pressure_section_tol = 1e-3  relative to max |p|, pressure section means
///   constants =                       constants file for homog/converge; empty: solve the cells
///   output_dir = out
///   profile_samples = 200, interface_samples = 64
///
/// Numbers accept the fraction form "a/b". '#' starts a comment line.
struct RunConfig {
  FlowData flow;
  double eps = 0.125;
  std::vector<double> eps_list{0.25, 0.125, 0.0625};
  std::optional<ObstacleSpec> obstacle = ObstacleSpec{};
  StripSpec strip;
  DirectConfig direct;
  double h_sub = 0.05;
  double h_sub_interface = 0.01;
  double identity_tol = 0.01;
  double section_tol = 1e-6;
  double pressure_section_tol = 1e-3;
  std::string constants_path;
  std::string output_dir = "out";
  int profile_samples = 200;
  int interface_samples = 64;
};

/// Throws ConfigError: "UnknownKey", "DuplicateKey", "BadValue", "SyntaxError".
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
/// Applies one key; same errors as parse_config.
void set_config_value(RunConfig& c, const std::string& key, const std::string& value);

/// Every key with its effective value, one "key = value" line each, sorted by key.
std::string canonical_text(const RunConfig& c);
/// FNV-1a 64 of canonical_text.
std::uint64_t config_hash(const RunConfig& c);
/// "stentflow <version> config <16 hex digits>".
std::string provenance(const RunConfig& c);

}  // namespace stentflow
