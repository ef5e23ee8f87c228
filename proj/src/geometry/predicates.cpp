#include "geometry/predicates.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>

namespace stentflow::predicates {
namespace {

using Rational = boost::multiprecision::cpp_rational;

constexpr double kEps = std::numeric_limits<double>::epsilon() * 0.5;
constexpr double kOrientBound = (3.0 + 16.0 * kEps) * kEps;
constexpr double kIncircleBound = (10.0 + 96.0 * kEps) * kEps;

int sign_of(const Rational& r) { return r > 0 ? 1 : (r < 0 ? -1 : 0); }

int orient_exact(Point a, Point b, Point c) {
  const Rational ax(a.x), ay(a.y), bx(b.x), by(b.y), cx(c.x), cy(c.y);
  return sign_of((ax - cx) * (by - cy) - (ay - cy) * (bx - cx));
}

int incircle_exact(Point a, Point b, Point c, Point d) {
  const Rational dx(d.x), dy(d.y);
  const Rational adx = Rational(a.x) - dx, ady = Rational(a.y) - dy;
  const Rational bdx = Rational(b.x) - dx, bdy = Rational(b.y) - dy;
  const Rational cdx = Rational(c.x) - dx, cdy = Rational(c.y) - dy;
  const Rational alift = adx * adx + ady * ady;
  const Rational blift = bdx * bdx + bdy * bdy;
  const Rational clift = cdx * cdx + cdy * cdy;
  const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
  return sign_of(det);
}

}  // namespace

int orient2d(Point a, Point b, Point c) {
  const double left = (a.x - c.x) * (b.y - c.y);
  const double right = (a.y - c.y) * (b.x - c.x);
  const double det = left - right;
  const double bound = kOrientBound * (std::abs(left) + std::abs(right));
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return orient_exact(a, b, c);
}

int incircle(Point a, Point b, Point c, Point d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double bc = bdx * cdy - cdx * bdy;
  const double ca = cdx * ady - adx * cdy;
  const double ab = adx * bdy - bdx * ady;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  const double det = alift * bc + blift * ca + clift * ab;
  const double permanent = (std::abs(bdx * cdy) + std::abs(cdx * bdy)) * alift +
                           (std::abs(cdx * ady) + std::abs(adx * cdy)) * blift +
                           (std::abs(adx * bdy) + std::abs(bdx * ady)) * clift;
  const double bound = kIncircleBound * permanent;
  if (det > bound) return 1;
  if (-det > bound) return -1;
  return incircle_exact(a, b, c, d);
}

Point circumcenter(Point a, Point b, Point c) {
  const double bx = b.x - a.x, by = b.y - a.y;
  const double cx = c.x - a.x, cy = c.y - a.y;
  const double d = 2.0 * (bx * cy - by * cx);
  const double b2 = bx * bx + by * by;
  const double c2 = cx * cx + cy * cy;
  return {a.x + (cy * b2 - by * c2) / d, a.y + (bx * c2 - cx * b2) / d};
}

}  // namespace stentflow::predicates
