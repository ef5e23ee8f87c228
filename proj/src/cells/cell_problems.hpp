#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "geometry/geometry.hpp"
#include "solver/stokes_solver.hpp"

namespace stentflow {

/// Truncated periodic strip ]0,1[ x ]-L,L[ with its obstacle.
struct Strip {
  std::shared_ptr<const Mesh> mesh;
  std::optional<ObstacleSpec> obstacle;
  double L = 10.0;
};

Strip make_strip(const std::optional<ObstacleSpec>& obstacle, const StripSpec& spec);

enum class CellProblem { Beta, Upsilon, Chi, Varkappa };
std::string_view to_string(CellProblem p);

struct CellConfig {
  SolverConfig solver;
  AssemblyOptions assembly;
  int band_samples = 16;  // sections per far-field band
};

struct CellSolution {
  CellProblem which = CellProblem::Beta;
  Strip strip;
  StokesSolution solution;
  double norm_band_lo = 0.0;  // pressure has zero mean over y2 in [lo, hi]
  double norm_band_hi = 0.0;
};

/// beta = -y2 e1 on P, beta2 = 0 at y2 = +-L. Rejects strips without obstacle
/// (ConfigError "EmptyObstacle").
CellSolution solve_beta(const Strip& strip, const CellConfig& config = {});
/// Line source e1 on Sigma, Upsilon = 0 on P, Upsilon2 = 0 at y2 = +-L.
CellSolution solve_upsilon(const Strip& strip, const CellConfig& config = {});
/// chi = 0 on P, chi2 = -1 at y2 = +-L.
CellSolution solve_chi(const Strip& strip, const CellConfig& config = {});
/// Source -2 (d1 chi - (eta - eta_far) e1), varkappa = 0 on P, varkappa2 = 1 at y2 = +-L.
/// Throws ConfigError("MeshMismatch") if `chi` lives on another mesh.
CellSolution solve_varkappa(const Strip& strip, const CellSolution& chi, const CellConfig& config = {});

enum class CellField { U1, U2, Pressure };

/// Integral over y1 in ]0,1[ of a field along the horizontal line y2 (fluid part only).
/// Triangles with an edge on the line count only from above.
double section_average(const Mesh& mesh, const TriScalarField& f, double y2);
double section_average(const CellSolution& s, CellField field, double y2);

struct BandStats {
  double mean = 0.0;
  double spread = 0.0;  // max |section - mean| over the sampled sections
};
/// Sections at the midpoints of `samples` equal sub-intervals of [lo, hi].
BandStats band_average(const CellSolution& s, CellField field, double lo, double hi, int samples);

/// Mean over the top band [L-2, L-1] and the bottom band [-L+1, -L+2].
struct FarField {
  BandStats top;
  BandStats bottom;
  double jump() const { return top.mean - bottom.mean; }
};
FarField far_field(const CellSolution& s, CellField field, int samples = 16);

/// integral of |grad u|^2 over the strip.
double gradient_energy(const StokesSolution& s);

struct CellConstants {
  double beta1_plus = 0.0, beta1_minus = 0.0;
  double ups1_plus = 0.0, ups1_minus = 0.0;
  double eta_plus = 0.0, eta_minus = 0.0;
  double eta_jump = 0.0;
  double beta_grad_energy = 0.0, ups_grad_energy = 0.0, chi_grad_energy = 0.0;
  double obstacle_area = 0.0;
  double L = 0.0;
  std::optional<double> varkappa1_jump, mu_jump;
  // Right-hand sides of the varkappa identities, computed from beta, chi and eta.
  std::optional<double> mu_jump_identity, varkappa1_jump_identity;
};

/// Far-field constants from band means, energies by quadrature, |J_s| analytic.
/// Throws ConfigError("MeshMismatch") if the solutions live on different meshes.
CellConstants extract_constants(const CellSolution& beta, const CellSolution& upsilon, const CellSolution& chi,
                                const CellSolution* varkappa = nullptr, int band_samples = 16);

/// Residuals of the averaged identities satisfied by the cell solutions.
struct IdentityReport {
  double beta_jump_rel = 0.0;       // beta1(+) - beta1(-) vs -|J_s| - |grad beta|^2
  double ups_bottom_rel = 0.0;      // ups1(-) vs |grad ups|^2
  double ups_jump_rel = 0.0;        // ups1(+) - ups1(-) vs beta1(-)
  double chi_energy_rel = 0.0;      // |grad chi|^2 vs [eta]
  double beta2_section_max = 0.0;   // |mean beta2| over sections away from the obstacle
  double ups2_section_max = 0.0;    // |mean ups2| over all sections
  double pressure_section_rel = 0.0;  // |mean pi|, |mean varpi| below 0 and above P, relative to max |p|
  double section_flatness_max = 0.0;  // band spreads of the far-field means
  std::optional<double> mu_jump_rel;
};

IdentityReport check_identities(const CellSolution& beta, const CellSolution& upsilon, const CellSolution& chi,
                                const CellConstants& constants, int sections = 81);

/// Flat "key = value" text; '#' lines carry `provenance`.
void write_constants(std::ostream& os, const CellConstants& c, const std::string& provenance = {});
/// Reads the key=value format. Missing required keys throw ConfigError("MalformedConstants").
CellConstants read_constants(std::istream& is);
/// Two-column CSV "name,value".
void write_constants_csv(std::ostream& os, const CellConstants& c, const std::string& provenance = {});

/// Velocity and pressure at the mesh vertices.
void write_cell_vtk(std::ostream& os, const CellSolution& s);

}  // namespace stentflow
