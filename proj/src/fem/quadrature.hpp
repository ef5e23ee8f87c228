#pragma once

#include <array>

#include "geometry/types.hpp"

namespace stentflow {

/// Triangle rule in barycentric coordinates; weights sum to 1 (multiply by the area).
struct TriQuadPoint {
  std::array<double, 3> bary;
  double weight;
};

/// Six-point rule, exact for polynomials of degree 4.
const std::array<TriQuadPoint, 6>& triangle_rule();

/// Gauss-Legendre on [0,1], three points, exact for degree 5; weights sum to 1.
struct LineQuadPoint {
  double t;
  double weight;
};
const std::array<LineQuadPoint, 3>& line_rule();

}  // namespace stentflow
