#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "geometry/types.hpp"

namespace stentflow {

struct TaggedEdge {
  int a = 0;
  int b = 0;
  BoundaryTag tag = BoundaryTag::Gamma1;

  friend bool operator==(const TaggedEdge&, const TaggedEdge&) = default;
};

/// Conforming triangulation with tagged boundary segments and interior interface lines.
///
/// Triangles are stored counter-clockwise. `boundary_edges` are oriented so that the
/// domain lies to their left; `interface_edges` (Gamma0, Sigma) carry no orientation.
struct Mesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<TaggedEdge> boundary_edges;
  std::vector<TaggedEdge> interface_edges;

  double signed_area(int tri) const;
  double total_area() const;
  /// Smallest interior angle over all triangles, in degrees.
  double min_angle_deg() const;
  /// Longest edge of a triangle.
  double diameter(int tri) const;
  Point centroid(int tri) const;

  friend bool operator==(const Mesh&, const Mesh&) = default;
};

/// Structural checks: positive areas, edge manifoldness, every boundary edge tagged once.
/// Throws NumericalError("InvalidMesh") with a description of the first violation.
void validate(const Mesh& mesh);

/// Text format: optional '#' comment lines, a header line
/// "vertices N / triangles M / edges K", then N lines "x y", M lines "i j k" and K lines
/// "i j TAG" (boundary edges first, then interface edges).
void write_mesh_text(std::ostream& os, const Mesh& mesh, const std::string& provenance = {});
Mesh read_mesh_text(std::istream& is);

/// Point data attached to a VTK export: either one scalar per vertex or a vector per vertex.
struct VtkPointField {
  std::string name;
  int components = 1;  // 1 or 2
  std::vector<double> values;  // size = components * n_vertices
};

/// Legacy ASCII VTK unstructured grid (linear triangles, cell data = region id optional).
void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<VtkPointField>& fields,
               const std::string& title);

}  // namespace stentflow
