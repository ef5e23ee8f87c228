#include "fem/quadrature.hpp"

#include <cmath>

namespace stentflow {

const std::array<TriQuadPoint, 6>& triangle_rule() {
  static const std::array<TriQuadPoint, 6> rule = [] {
    constexpr double a = 0.445948490915964886318329253883;
    constexpr double wa = 0.223381589678011465944827850822;
    constexpr double b = 0.091576213509770743459571463402;
    constexpr double wb = 0.109951743655321867388505482511;
    return std::array<TriQuadPoint, 6>{{
        {{1.0 - 2.0 * a, a, a}, wa},
        {{a, 1.0 - 2.0 * a, a}, wa},
        {{a, a, 1.0 - 2.0 * a}, wa},
        {{1.0 - 2.0 * b, b, b}, wb},
        {{b, 1.0 - 2.0 * b, b}, wb},
        {{b, b, 1.0 - 2.0 * b}, wb},
    }};
  }();
  return rule;
}

const std::array<LineQuadPoint, 3>& line_rule() {
  static const std::array<LineQuadPoint, 3> rule = [] {
    const double d = 0.5 * std::sqrt(0.6);
    return std::array<LineQuadPoint, 3>{{{0.5 - d, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + d, 5.0 / 18.0}}};
  }();
  return rule;
}

}  // namespace stentflow
