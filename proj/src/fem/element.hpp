#pragma once

#include <array>

#include "geometry/mesh.hpp"

namespace stentflow {

/// Affine geometry of one triangle plus P1/P2 Lagrange shape functions in barycentric form.
/// P2 ordering: vertices 0..2, then midpoints of edges (0,1), (1,2), (2,0).
struct Element {
  std::array<Point, 3> v;
  std::array<Vec2, 3> grad_lambda;
  double area = 0.0;

  Element(const Mesh& mesh, int tri) {
    const auto& t = mesh.triangles[tri];
    for (int k = 0; k < 3; ++k) v[k] = mesh.vertices[t[k]];
    const double det = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[1].y - v[0].y) * (v[2].x - v[0].x);
    area = 0.5 * det;
    for (int k = 0; k < 3; ++k) {
      const Point a = v[(k + 1) % 3], b = v[(k + 2) % 3];
      grad_lambda[k] = {(a.y - b.y) / det, (b.x - a.x) / det};
    }
  }

  Point map(const std::array<double, 3>& l) const {
    return {l[0] * v[0].x + l[1] * v[1].x + l[2] * v[2].x, l[0] * v[0].y + l[1] * v[1].y + l[2] * v[2].y};
  }

  static std::array<double, 6> p2_values(const std::array<double, 3>& l) {
    return {l[0] * (2 * l[0] - 1), l[1] * (2 * l[1] - 1), l[2] * (2 * l[2] - 1),
            4 * l[0] * l[1],       4 * l[1] * l[2],       4 * l[2] * l[0]};
  }

  std::array<Vec2, 6> p2_grads(const std::array<double, 3>& l) const {
    std::array<Vec2, 6> g;
    for (int k = 0; k < 3; ++k) g[k] = (4 * l[k] - 1) * grad_lambda[k];
    for (int k = 0; k < 3; ++k) {
      const int j = (k + 1) % 3;
      g[3 + k] = 4.0 * (l[k] * grad_lambda[j] + l[j] * grad_lambda[k]);
    }
    return g;
  }

  /// Barycentric coordinates of an arbitrary point.
  std::array<double, 3> barycentric(Point p) const {
    const double l1 = dot(grad_lambda[1], p - v[0]);
    const double l2 = dot(grad_lambda[2], p - v[0]);
    return {1.0 - l1 - l2, l1, l2};
  }
};

}  // namespace stentflow
