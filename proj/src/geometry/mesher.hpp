#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "geometry/mesh.hpp"

namespace stentflow {

struct PslgSegment {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Gamma1;
  /// Index of a segment that must be split identically (periodic pairing), or -1.
  /// Partners have the same orientation: partner.a is the image of a.
  int partner = -1;
};

/// Planar straight-line graph: input vertices, tagged segments and hole seeds.
struct Pslg {
  std::vector<Point> points;
  std::vector<PslgSegment> segments;
  std::vector<Point> holes;

  int add_point(Point p) {
    points.push_back(p);
    return static_cast<int>(points.size()) - 1;
  }
  int add_segment(int a, int b, BoundaryTag tag) {
    segments.push_back({a, b, tag, -1});
    return static_cast<int>(segments.size()) - 1;
  }
};

/// Target edge length as a function of position.
using SizeField = std::function<double(Point)>;

struct MesherOptions {
  double min_angle_deg = 20.0;
  std::size_t max_vertices = 3'000'000;
};

/// Quality conforming Delaunay triangulation of a PSLG.
///
/// Segments are first subdivided according to `size`, the conforming Delaunay
/// triangulation is built by midpoint splitting, holes are carved, and triangles are then
/// refined by circumcenter insertion until every triangle has all angles at least
/// `min_angle_deg` and longest edge at most `size(centroid)`. Partner segments are always
/// split at the same parameter so periodic traces stay exact translates.
///
/// Throws NumericalError("MeshQualityFailure") if refinement cannot reach the angle
/// bound within `max_vertices`.
Mesh generate_mesh(const Pslg& pslg, const SizeField& size, const MesherOptions& options = {});

}  // namespace stentflow
