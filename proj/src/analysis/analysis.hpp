#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homog/homogenized.hpp"

namespace stentflow {

struct DirectConfig {
  double h = 0.05;
  RefineSpec refine;
  SolverConfig solver;
  AssemblyOptions assembly;
};

/// Stokes flow in the perforated domain.
struct DirectSolution {
  MacroGeometry geometry;
  std::shared_ptr<const Mesh> mesh;
  StokesSolution solution;
};

/// Walls at rest on Gamma1, Gamma2 and the obstacles; u.t = 0 and the prescribed pressure on
/// Gamma_in, Gamma_out1 and (collateral only) Gamma_out2.
BcMap direct_bcs(const FlowData& flow);

DirectSolution solve_direct(double eps, const FlowData& flow, const std::optional<ObstacleSpec>& obstacle,
                            const DirectConfig& config);

/// Integral of u.n (outward normal) over the boundary edges carrying `tag`.
double boundary_flux(const StokesSolution& s, BoundaryTag tag);
/// Integral over Gamma0 of u.n with n pointing into Omega_2 (n = -e2).
double flowrate_direct(const StokesSolution& s);

/// L2 norm over Omega_1 u Omega_2 of u_eps - approx, the direct field being extended by zero
/// inside the obstacles.
double l2_velocity_error(const DirectSolution& d, const std::function<Vec2(Point)>& approx);

/// |grad q|_L2 where -Laplace q = p_eps - approx on the direct mesh (P1) with q = 0 on its
/// whole boundary, obstacles included.
double hm1_pressure_error(const DirectSolution& d, const std::function<double(Point)>& approx);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;  // log(error) = intercept + slope * log(eps)
  double residual = 0.0;   // rms of the log residuals
  int points = 0;
};

/// Least squares on (log eps, log error), ignoring eps = 1. Throws ConfigError("TooFewPoints")
/// with fewer than 3 usable points and ConfigError("InvalidArgument") for non-positive data.
SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& error);

struct ErrorReport {
  double eps = 0.0;
  double l2_vel_zero = 0.0, l2_vel_first = 0.0;
  double hm1_p_zero = 0.0, hm1_p_first = 0.0;
  double q_direct = 0.0, q_formula = 0.0, q_first_order = 0.0;
  int mesh_vertices = 0;
  int mesh_triangles = 0;
  std::string solver;
  bool ok = true;
  std::string diagnostic;  // failure description when !ok
};

struct StudyConfig {
  std::vector<double> eps_list{0.25, 0.125, 0.0625};
  FlowData flow;
  ObstacleSpec obstacle;
  StripSpec strip;
  DirectConfig direct;
  double h_sub = 0.05;            // first-order subdomain meshes
  double h_sub_interface = 0.01;  // their size along Gamma0
  std::optional<CellConstants> constants;  // computed from the strip when absent
  int profile_samples = 200;
  std::string output_dir;  // profiles_eps<val>.csv written here when non-empty
  std::string provenance;
  int threads = 1;  // eps cases solved concurrently
};

struct StudyResult {
  CellConstants constants;
  std::vector<ErrorReport> reports;
  std::optional<SlopeFit> l2_zero, l2_first, hm1_zero, hm1_first;
};

/// Errors of the zero- and first-order approximations against direct solves for each eps.
/// Failures of one eps are recorded in its report and the study continues. Reports follow the
/// order of eps_list whatever the thread count.
StudyResult convergence_study(const StudyConfig& config);

/// Columns eps,l2_vel_zero,l2_vel_first,hm1_p_zero,hm1_p_first,q_direct,q_formula,q_first_order.
void write_errors_csv(std::ostream& os, const StudyResult& r, const std::string& provenance = {});

/// Columns x1,u_eps_1_at_eps,ubar_1_at_eps,u_eps_2_at_0,ubar_2_at_0 (sampled at cell midpoints).
void write_profiles_csv(std::ostream& os, const DirectSolution& d, const AveragedApproximation& a, int samples,
                        const std::string& provenance = {});

/// Direct velocity sampled on Gamma0.
Vec2 direct_velocity_at(const DirectSolution& d, Point x);

}  // namespace stentflow
