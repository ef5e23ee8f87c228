#pragma once

#include "geometry/types.hpp"

namespace stentflow::predicates {

/// Sign of the signed area of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear.
/// Exact for all double inputs.
int orient2d(Point a, Point b, Point c);

/// +1 if d lies strictly inside the circumcircle of the counter-clockwise triangle (a, b, c),
/// -1 if strictly outside, 0 if cocircular. Exact for all double inputs.
int incircle(Point a, Point b, Point c, Point d);

/// Circumcenter (floating point, not exact).
Point circumcenter(Point a, Point b, Point c);

}  // namespace stentflow::predicates
