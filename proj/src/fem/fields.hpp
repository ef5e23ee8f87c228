#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "fem/solution.hpp"

namespace stentflow {

struct Location {
  int tri = -1;
  std::array<double, 3> bary{};
};

/// Uniform-grid point location on a triangle mesh.
class PointLocator {
 public:
  explicit PointLocator(const Mesh& mesh);
  /// Triangle containing p, accepting points up to `tol` outside (in barycentric units
  /// scaled by the triangle diameter). nullopt if p is outside the mesh.
  std::optional<Location> locate(Point p, double tol = 1e-10) const;

 private:
  const Mesh& mesh_;
  Point lo_{};
  double cell_ = 1.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

using TriVectorField = std::function<Vec2(int tri, const std::array<double, 3>& bary, Point x)>;
using TriScalarField = std::function<double(int tri, const std::array<double, 3>& bary, Point x)>;
using RegionFn = std::function<bool(Point centroid)>;

/// (integral over region of |a - b|^2)^(1/2) with the six-point rule on `mesh`. The region
/// is selected by triangle centroid; an empty RegionFn means the whole mesh.
double l2_norm_diff(const Mesh& mesh, const TriVectorField& a, const std::function<Vec2(Point)>& b,
                    const RegionFn& region = {});
double l2_norm_diff(const Mesh& mesh, const TriScalarField& a, const std::function<double(Point)>& b,
                    const RegionFn& region = {});

/// Adapters for a solution on its own mesh.
TriVectorField velocity_field(const StokesSolution& s);
TriScalarField pressure_field(const StokesSolution& s);

/// Point evaluators of a solution on another mesh. Points outside the mesh throw
/// NumericalError("PointLocationFailure") unless `outside` is given, in which case its value is used.
std::function<Vec2(Point)> velocity_evaluator(const StokesSolution& s, std::shared_ptr<const PointLocator> locator,
                                              std::optional<Vec2> outside = std::nullopt);
std::function<double(Point)> pressure_evaluator(const StokesSolution& s, std::shared_ptr<const PointLocator> locator,
                                                std::optional<double> outside = std::nullopt);

/// Integral of a P1 nodal field over the triangles selected by `region`, and the selected area.
std::pair<double, double> integrate_p1(const Mesh& mesh, const Vec& nodal, const RegionFn& region = {});

}  // namespace stentflow
