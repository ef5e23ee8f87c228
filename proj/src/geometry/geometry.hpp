#pragma once

#include <optional>
#include <vector>

#include "geometry/mesh.hpp"
#include "geometry/mesher.hpp"

namespace stentflow {

/// A disk obstacle in unit-cell coordinates. The only shape supported so far.
struct ObstacleSpec {
  Point center{0.5, 0.25};
  double radius = 3.0 / 16.0;

  double area() const;
  /// Throws ConfigError("ObstacleTouchesCell") unless the closed disk lies inside ]0,1[^2.
  void validate_in_cell() const;
};

struct Disk {
  Point center;
  double radius = 0.0;
};

/// The perforated macroscopic domain: main channel ]0,1[x]0,1[, lower channel
/// ]0,1[x]-1,0[, and m = 1/eps scaled obstacle copies in the layer ]0,1[x]0,eps[.
struct MacroGeometry {
  double eps = 1.0;
  int m = 1;
  FlowCase flow_case = FlowCase::Collateral;
  std::optional<ObstacleSpec> obstacle;  // nullopt: unobstructed channel pair
  std::vector<Disk> holes;
};

/// Throws ConfigError("NonIntegerReciprocal") if 1/eps is not an integer within 1e-12,
/// and ConfigError("ObstacleTouchesCell") for obstacles not strictly inside the cell.
MacroGeometry build_macro_geometry(double eps, FlowCase flow_case, std::optional<ObstacleSpec> obstacle);

/// Grading controls for macroscopic meshes. Sizes are edge lengths.
struct RefineSpec {
  double obstacle_factor = 0.25;  // size near the layer relative to h_target
  double cells_per_period = 8.0;  // size near the layer never exceeds eps / cells_per_period
  double corner_factor = 0.5;     // extra refinement at the corners O and (1,0)
  double grading = 0.3;           // growth rate of the size away from refined zones
  int min_circle_segments = 16;
  double min_angle_deg = 20.0;
};

/// Mesh of the perforated domain with Gamma0 as an interior mesh line.
/// Throws ConfigError for h_target <= 0, NumericalError("MeshQualityFailure") on quality loss.
Mesh triangulate(const MacroGeometry& geometry, double h_target, const RefineSpec& refine = {});

enum class Subdomain { Upper, Lower };

/// Mesh of Omega_1 = ]0,1[^2 (Upper) or Omega_2 = ]0,1[x]-1,0[ (Lower) with Gamma0 as a
/// boundary; graded towards Gamma0 and its end points. Used by the first-order corrector.
Mesh triangulate_subdomain(Subdomain which, FlowCase flow_case, double h_target, double h_interface,
                           const RefineSpec& refine = {});

/// Tags of the four sides of a structured rectangle: bottom, right, top, left.
struct RectangleTags {
  BoundaryTag bottom = BoundaryTag::Gamma2;
  BoundaryTag right = BoundaryTag::GammaOut1;
  BoundaryTag top = BoundaryTag::Gamma1;
  BoundaryTag left = BoundaryTag::GammaIn;
};

/// Structured (nx x ny quads, each split along its rising diagonal) mesh of a rectangle.
Mesh structured_rectangle(Point lower_left, Point upper_right, int nx, int ny, const RectangleTags& tags);

/// Flat channel ]0,1[^2 with walls on top and bottom, pressure sides left and right.
/// Uses n = ceil(1/h) cells per side.
Mesh flat_channel_mesh(double h);

struct StripSpec {
  double L = 10.0;
  double h_far = 0.25;
  double h_near = 0.03;     // size around the obstacle and Sigma
  double h_obstacle = 0.0;  // size on the obstacle boundary; 0 means h_near
  double obstacle_grading = 0.3;
  double near_halo = 0.6;   // half-width (in y2) of the refined zone around [min(0, obstacle), max]
  double grading = 0.2;
  int min_circle_segments = 16;
  double min_angle_deg = 20.0;
};

/// Mesh of the truncated periodic strip ]0,1[x]-L,L[ minus the obstacle, with Sigma as an
/// interior line and left/right traces that are exact translates. Without an obstacle and
/// with h_near == h_far the sides are split uniformly.
/// Throws ConfigError for L < 2 or h <= 0, NumericalError("PeriodicMismatch") if the traces differ.
Mesh build_strip_mesh(const std::optional<ObstacleSpec>& obstacle, const StripSpec& spec);

/// Left/right vertex pairs (left index, right index) of a strip mesh, matched by y2.
std::vector<std::pair<int, int>> periodic_vertex_pairs(const Mesh& strip, double tol = 1e-12);

}  // namespace stentflow
