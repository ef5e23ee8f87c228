#include "fem/fields.hpp"

#include <algorithm>
#include <cmath>

#include "fem/element.hpp"
#include "fem/quadrature.hpp"

namespace stentflow {

Vec2 StokesSolution::velocity_at(int tri, const std::array<double, 3>& bary) const {
  const auto nodes = space->nodes(tri);
  const auto phi = Element::p2_values(bary);
  Vec2 u{0.0, 0.0};
  for (int i = 0; i < 6; ++i) {
    u.x += phi[i] * velocity[space->vdof(0, nodes[i])];
    u.y += phi[i] * velocity[space->vdof(1, nodes[i])];
  }
  return u;
}

std::array<Vec2, 2> StokesSolution::velocity_gradient(int tri, const std::array<double, 3>& bary) const {
  const Element el(space->mesh(), tri);
  const auto nodes = space->nodes(tri);
  const auto grad = el.p2_grads(bary);
  std::array<Vec2, 2> g{Vec2{0, 0}, Vec2{0, 0}};
  for (int i = 0; i < 6; ++i)
    for (int c = 0; c < 2; ++c) g[c] = g[c] + velocity[space->vdof(c, nodes[i])] * grad[i];
  return g;
}

double StokesSolution::pressure_at(int tri, const std::array<double, 3>& bary) const {
  const auto& v = space->mesh().triangles[tri];
  return bary[0] * pressure[v[0]] + bary[1] * pressure[v[1]] + bary[2] * pressure[v[2]];
}

std::vector<double> StokesSolution::vertex_velocity() const {
  std::vector<double> out(2 * space->n_vertices());
  for (int k = 0; k < space->n_vertices(); ++k) {
    out[2 * k] = velocity[space->vdof(0, k)];
    out[2 * k + 1] = velocity[space->vdof(1, k)];
  }
  return out;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(mesh) {
  Point lo{1e300, 1e300}, hi{-1e300, -1e300};
  for (const auto& p : mesh.vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  const double area = std::max((hi.x - lo.x) * (hi.y - lo.y), 1e-300);
  cell_ = std::sqrt(2.0 * area / std::max<std::size_t>(1, mesh.triangles.size()));
  lo_ = lo - Vec2{cell_, cell_};
  nx_ = static_cast<int>((hi.x - lo_.x) / cell_) + 2;
  ny_ = static_cast<int>((hi.y - lo_.y) / cell_) + 2;
  buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    Point a{1e300, 1e300}, b{-1e300, -1e300};
    for (int v : mesh.triangles[t]) {
      const Point p = mesh.vertices[v];
      a = {std::min(a.x, p.x), std::min(a.y, p.y)};
      b = {std::max(b.x, p.x), std::max(b.y, p.y)};
    }
    const double pad = 1e-9 * cell_;
    const int i0 = static_cast<int>((a.x - pad - lo_.x) / cell_), i1 = static_cast<int>((b.x + pad - lo_.x) / cell_);
    const int j0 = static_cast<int>((a.y - pad - lo_.y) / cell_), j1 = static_cast<int>((b.y + pad - lo_.y) / cell_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(t);
  }
}

std::optional<Location> PointLocator::locate(Point p, double tol) const {
  const int i = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
  const int j = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
  if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return std::nullopt;
  Location best;
  double best_score = -1e300;
  for (int t : buckets_[static_cast<std::size_t>(j) * nx_ + i]) {
    const Element el(mesh_, t);
    const auto l = el.barycentric(p);
    const double score = std::min({l[0], l[1], l[2]});
    if (score > best_score) {
      best_score = score;
      best = {t, l};
    }
  }
  if (best.tri < 0) return std::nullopt;
  if (best_score < 0.0) {
    // Distance outside the triangle is roughly -score times its height.
    if (-best_score * mesh_.diameter(best.tri) > tol) return std::nullopt;
  }
  return best;
}

namespace {

template <class Diff>
double l2_generic(const Mesh& mesh, const RegionFn& region, Diff diff) {
  double s = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    if (region && !region(mesh.centroid(t))) continue;
    const Element el(mesh, t);
    for (const auto& q : triangle_rule()) s += q.weight * el.area * diff(t, q.bary, el.map(q.bary));
  }
  return std::sqrt(s);
}

}  // namespace

double l2_norm_diff(const Mesh& mesh, const TriVectorField& a, const std::function<Vec2(Point)>& b,
                    const RegionFn& region) {
  return l2_generic(mesh, region, [&](int t, const std::array<double, 3>& l, Point x) {
    const Vec2 d = a(t, l, x) - b(x);
    return dot(d, d);
  });
}

double l2_norm_diff(const Mesh& mesh, const TriScalarField& a, const std::function<double(Point)>& b,
                    const RegionFn& region) {
  return l2_generic(mesh, region, [&](int t, const std::array<double, 3>& l, Point x) {
    const double d = a(t, l, x) - b(x);
    return d * d;
  });
}

TriVectorField velocity_field(const StokesSolution& s) {
  return [&s](int t, const std::array<double, 3>& l, Point) { return s.velocity_at(t, l); };
}

TriScalarField pressure_field(const StokesSolution& s) {
  return [&s](int t, const std::array<double, 3>& l, Point) { return s.pressure_at(t, l); };
}

namespace {
[[noreturn]] void location_failure(Point p) {
  throw NumericalError("PointLocationFailure",
                       "point (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ") lies outside the mesh");
}
}  // namespace

std::function<Vec2(Point)> velocity_evaluator(const StokesSolution& s, std::shared_ptr<const PointLocator> locator,
                                              std::optional<Vec2> outside) {
  return [&s, locator, outside](Point p) {
    auto loc = locator->locate(p);
    if (!loc) {
      if (outside) return *outside;
      location_failure(p);
    }
    return s.velocity_at(loc->tri, loc->bary);
  };
}

std::function<double(Point)> pressure_evaluator(const StokesSolution& s, std::shared_ptr<const PointLocator> locator,
                                                std::optional<double> outside) {
  return [&s, locator, outside](Point p) {
    auto loc = locator->locate(p);
    if (!loc) {
      if (outside) return *outside;
      location_failure(p);
    }
    return s.pressure_at(loc->tri, loc->bary);
  };
}

std::pair<double, double> integrate_p1(const Mesh& mesh, const Vec& nodal, const RegionFn& region) {
  double integral = 0.0, area = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    if (region && !region(mesh.centroid(t))) continue;
    const auto& v = mesh.triangles[t];
    const double a = mesh.signed_area(t);
    integral += a * (nodal[v[0]] + nodal[v[1]] + nodal[v[2]]) / 3.0;
    area += a;
  }
  return {integral, area};
}

}  // namespace stentflow
