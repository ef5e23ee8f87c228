#include "geometry/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace stentflow {
namespace {

// Adds a closed polygon approximating a disk, tagged GammaEps, plus its hole seed.
void add_circle(Pslg& pslg, const Disk& disk, double h, int min_segments) {
  const int n = std::max(min_segments, static_cast<int>(std::ceil(2.0 * std::numbers::pi * disk.radius / h)));
  const int first = static_cast<int>(pslg.points.size());
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * std::numbers::pi * k / n;
    pslg.add_point({disk.center.x + disk.radius * std::cos(th), disk.center.y + disk.radius * std::sin(th)});
  }
  for (int k = 0; k < n; ++k) pslg.add_segment(first + k, first + (k + 1) % n, BoundaryTag::GammaEps);
  pslg.holes.push_back(disk.center);
}

double dist_to_interval(double v, double lo, double hi) {
  if (v < lo) return lo - v;
  if (v > hi) return v - hi;
  return 0.0;
}

void require_positive(double h, const char* what) {
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("InvalidArgument", std::string(what) + " must be positive");
}

// Replaces the horizontal boundary `tag` by layers of split quads reaching y = target,
// reusing the x positions of the boundary vertices.
void extrude_strip(Mesh& mesh, BoundaryTag tag, double target, double h) {
  std::vector<int> row;
  std::vector<TaggedEdge> kept;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag == tag) {
      row.push_back(e.a);
      row.push_back(e.b);
    } else {
      kept.push_back(e);
    }
  }
  std::sort(row.begin(), row.end(), [&](int a, int b) { return mesh.vertices[a].x < mesh.vertices[b].x; });
  row.erase(std::unique(row.begin(), row.end()), row.end());
  const double y0 = mesh.vertices[row.front()].y;
  const bool up = target > y0;
  const int layers = std::max(1, static_cast<int>(std::lround(std::abs(target - y0) / h)));
  const int n = static_cast<int>(row.size());
  for (int r = 1; r <= layers; ++r) {
    const double y = r == layers ? target : y0 + (target - y0) * r / layers;
    std::vector<int> next(n);
    for (int j = 0; j < n; ++j) {
      next[j] = static_cast<int>(mesh.vertices.size());
      mesh.vertices.push_back({mesh.vertices[row[j]].x, y});
    }
    // Lower and upper rows of this layer.
    const auto& lo = up ? row : next;
    const auto& hi = up ? next : row;
    for (int j = 0; j + 1 < n; ++j) {
      mesh.triangles.push_back({lo[j], lo[j + 1], hi[j + 1]});
      mesh.triangles.push_back({lo[j], hi[j + 1], hi[j]});
    }
    kept.push_back({hi[0], lo[0], BoundaryTag::StripLeft});
    kept.push_back({lo[n - 1], hi[n - 1], BoundaryTag::StripRight});
    row = std::move(next);
  }
  for (int j = 0; j + 1 < n; ++j) {
    if (up)
      kept.push_back({row[j + 1], row[j], tag});
    else
      kept.push_back({row[j], row[j + 1], tag});
  }
  mesh.boundary_edges = std::move(kept);
}

}  // namespace

double ObstacleSpec::area() const { return std::numbers::pi * radius * radius; }

void ObstacleSpec::validate_in_cell() const {
  if (!(radius > 0.0)) throw ConfigError("ObstacleTouchesCell", "obstacle radius must be positive");
  const double clearance = std::min({center.x, 1.0 - center.x, center.y, 1.0 - center.y}) - radius;
  if (!(clearance > 0.0))
    throw ConfigError("ObstacleTouchesCell", "obstacle disk must lie strictly inside the unit cell");
}

MacroGeometry build_macro_geometry(double eps, FlowCase flow_case, std::optional<ObstacleSpec> obstacle) {
  if (!(eps > 0.0) || eps > 1.0 + 1e-12)
    throw ConfigError("NonIntegerReciprocal", "eps must lie in ]0,1]");
  const double inv = 1.0 / eps;
  const double m = std::round(inv);
  if (std::abs(inv - m) > 1e-12 * std::max(1.0, m))
    throw ConfigError("NonIntegerReciprocal", "1/eps = " + std::to_string(inv) + " is not an integer");
  if (obstacle) obstacle->validate_in_cell();

  MacroGeometry g;
  g.m = static_cast<int>(m);
  g.eps = 1.0 / g.m;
  g.flow_case = flow_case;
  g.obstacle = obstacle;
  if (obstacle) {
    for (int i = 0; i < g.m; ++i) {
      g.holes.push_back({{g.eps * (obstacle->center.x + i), g.eps * obstacle->center.y},
                         g.eps * obstacle->radius});
    }
  }
  return g;
}

Mesh triangulate(const MacroGeometry& g, double h_target, const RefineSpec& refine) {
  require_positive(h_target, "h_target");
  const double eps = g.eps;
  const double h_layer = std::min(h_target * refine.obstacle_factor, eps / refine.cells_per_period);
  const double h_corner = h_layer * refine.corner_factor;
  const double grading = refine.grading;
  SizeField size = [=](Point p) {
    const double d = dist_to_interval(p.y, 0.0, eps);
    double h = d <= eps ? h_layer : std::min(h_target, h_layer + grading * (d - eps));
    h = std::min(h, h_corner + grading * distance(p, {0.0, 0.0}));
    h = std::min(h, h_corner + grading * distance(p, {1.0, 0.0}));
    return h;
  };

  Pslg pslg;
  const int p0 = pslg.add_point({0.0, -1.0});
  const int p1 = pslg.add_point({1.0, -1.0});
  const int p2 = pslg.add_point({1.0, 0.0});
  const int p3 = pslg.add_point({1.0, 1.0});
  const int p4 = pslg.add_point({0.0, 1.0});
  const int p5 = pslg.add_point({0.0, 0.0});
  pslg.add_segment(p0, p1, g.flow_case == FlowCase::Collateral ? BoundaryTag::GammaOut2 : BoundaryTag::Gamma2);
  pslg.add_segment(p1, p2, BoundaryTag::Gamma2);
  pslg.add_segment(p2, p3, BoundaryTag::GammaOut1);
  pslg.add_segment(p3, p4, BoundaryTag::Gamma1);
  pslg.add_segment(p4, p5, BoundaryTag::GammaIn);
  pslg.add_segment(p5, p0, BoundaryTag::Gamma2);
  pslg.add_segment(p5, p2, BoundaryTag::Gamma0);
  for (const auto& d : g.holes) add_circle(pslg, d, h_layer, refine.min_circle_segments);

  MesherOptions opts;
  opts.min_angle_deg = refine.min_angle_deg;
  return generate_mesh(pslg, size, opts);
}

Mesh triangulate_subdomain(Subdomain which, FlowCase flow_case, double h_target, double h_interface,
                           const RefineSpec& refine) {
  require_positive(h_target, "h_target");
  require_positive(h_interface, "h_interface");
  const double h_corner = h_interface * refine.corner_factor;
  const double grading = refine.grading;
  SizeField size = [=](Point p) {
    double h = std::min(h_target, h_interface + grading * std::abs(p.y));
    h = std::min(h, h_corner + grading * distance(p, {0.0, 0.0}));
    h = std::min(h, h_corner + grading * distance(p, {1.0, 0.0}));
    return h;
  };
  Pslg pslg;
  if (which == Subdomain::Upper) {
    const int a = pslg.add_point({0.0, 0.0}), b = pslg.add_point({1.0, 0.0});
    const int c = pslg.add_point({1.0, 1.0}), d = pslg.add_point({0.0, 1.0});
    pslg.add_segment(a, b, BoundaryTag::Gamma0);
    pslg.add_segment(b, c, BoundaryTag::GammaOut1);
    pslg.add_segment(c, d, BoundaryTag::Gamma1);
    pslg.add_segment(d, a, BoundaryTag::GammaIn);
  } else {
    const int a = pslg.add_point({0.0, -1.0}), b = pslg.add_point({1.0, -1.0});
    const int c = pslg.add_point({1.0, 0.0}), d = pslg.add_point({0.0, 0.0});
    pslg.add_segment(a, b, flow_case == FlowCase::Collateral ? BoundaryTag::GammaOut2 : BoundaryTag::Gamma2);
    pslg.add_segment(b, c, BoundaryTag::Gamma2);
    pslg.add_segment(c, d, BoundaryTag::Gamma0);
    pslg.add_segment(d, a, BoundaryTag::Gamma2);
  }
  MesherOptions opts;
  opts.min_angle_deg = refine.min_angle_deg;
  return generate_mesh(pslg, size, opts);
}

Mesh structured_rectangle(Point lo, Point hi, int nx, int ny, const RectangleTags& tags) {
  if (nx < 1 || ny < 1) throw ConfigError("InvalidArgument", "structured rectangle needs nx, ny >= 1");
  Mesh mesh;
  auto vid = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      mesh.vertices.push_back({i == nx ? hi.x : lo.x + (hi.x - lo.x) * i / nx,
                               j == ny ? hi.y : lo.y + (hi.y - lo.y) * j / ny});
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
      mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
    }
  }
  for (int i = 0; i < nx; ++i) mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), tags.bottom});
  for (int j = 0; j < ny; ++j) mesh.boundary_edges.push_back({vid(nx, j), vid(nx, j + 1), tags.right});
  for (int i = nx; i > 0; --i) mesh.boundary_edges.push_back({vid(i, ny), vid(i - 1, ny), tags.top});
  for (int j = ny; j > 0; --j) mesh.boundary_edges.push_back({vid(0, j), vid(0, j - 1), tags.left});
  validate(mesh);
  return mesh;
}

Mesh flat_channel_mesh(double h) {
  require_positive(h, "h");
  const int n = std::max(1, static_cast<int>(std::ceil(1.0 / h - 1e-12)));
  RectangleTags tags{BoundaryTag::Gamma2, BoundaryTag::GammaOut1, BoundaryTag::Gamma1, BoundaryTag::GammaIn};
  return structured_rectangle({0.0, 0.0}, {1.0, 1.0}, n, n, tags);
}

Mesh build_strip_mesh(const std::optional<ObstacleSpec>& obstacle, const StripSpec& spec) {
  if (!(spec.L >= 2.0)) throw ConfigError("InvalidArgument", "strip half-height L must be >= 2");
  require_positive(spec.h_far, "strip h_far");
  require_positive(spec.h_near, "strip h_near");
  const double L = spec.L;
  double band_lo = -spec.near_halo, band_hi = spec.near_halo;
  if (obstacle) {
    const auto& o = *obstacle;
    if (!(o.radius > 0.0) || !(o.center.x - o.radius > 0.0) || !(o.center.x + o.radius < 1.0))
      throw ConfigError("ObstacleTouchesCell", "obstacle must lie strictly inside the strip period");
    if (std::abs(o.center.y) <= o.radius)
      throw ConfigError("ObstacleCrossesSigma", "obstacle must not intersect the interface y2 = 0");
    if (std::abs(o.center.y) + o.radius >= L - 2.0)
      throw ConfigError("ObstacleTouchesCell", "obstacle too close to the strip truncation");
    band_lo = std::min(0.0, o.center.y - o.radius) - spec.near_halo;
    band_hi = std::max(0.0, o.center.y + o.radius) + spec.near_halo;
  }
  const double h_near = std::min(spec.h_near, spec.h_far);
  const double h_far = spec.h_far, grading = spec.grading;
  const double h_obs = spec.h_obstacle > 0.0 ? std::min(spec.h_obstacle, h_near) : h_near;
  const Point oc = obstacle ? obstacle->center : Point{};
  const double orad = obstacle ? obstacle->radius : 0.0;
  const bool has_obstacle = obstacle.has_value();
  SizeField size = [=](Point p) {
    const double d = dist_to_interval(p.y, band_lo, band_hi);
    double h = std::min(h_far, h_near + grading * d);
    if (has_obstacle) h = std::min(h, h_obs + spec.obstacle_grading * std::abs(distance(p, oc) - orad));
    return h;
  };

  // Unstructured core around the refined band; beyond it the size field is h_far and the
  // strip is extruded in layers, so the core does not depend on L.
  const double ramp = (h_far - h_near) / std::max(grading, 1e-12);
  double core_hi = band_hi + ramp + 2.0 * h_far, core_lo = band_lo - ramp - 2.0 * h_far;
  if (core_hi > L - h_far) core_hi = L;
  if (core_lo < -L + h_far) core_lo = -L;

  Pslg pslg;
  const int bl = pslg.add_point({0.0, core_lo}), br = pslg.add_point({1.0, core_lo});
  const int mr = pslg.add_point({1.0, 0.0}), tr = pslg.add_point({1.0, core_hi});
  const int tl = pslg.add_point({0.0, core_hi}), ml = pslg.add_point({0.0, 0.0});
  pslg.add_segment(bl, br, BoundaryTag::StripBottom);
  const int right_lo = pslg.add_segment(br, mr, BoundaryTag::StripRight);
  const int right_hi = pslg.add_segment(mr, tr, BoundaryTag::StripRight);
  pslg.add_segment(tr, tl, BoundaryTag::StripTop);
  const int left_lo = pslg.add_segment(bl, ml, BoundaryTag::StripLeft);
  const int left_hi = pslg.add_segment(ml, tl, BoundaryTag::StripLeft);
  pslg.add_segment(ml, mr, BoundaryTag::Sigma);
  pslg.segments[right_lo].partner = left_lo;
  pslg.segments[left_lo].partner = right_lo;
  pslg.segments[right_hi].partner = left_hi;
  pslg.segments[left_hi].partner = right_hi;
  if (obstacle) add_circle(pslg, {obstacle->center, obstacle->radius}, h_obs, spec.min_circle_segments);

  MesherOptions opts;
  opts.min_angle_deg = spec.min_angle_deg;
  Mesh mesh = generate_mesh(pslg, size, opts);
  if (core_hi < L) extrude_strip(mesh, BoundaryTag::StripTop, L, h_far);
  if (core_lo > -L) extrude_strip(mesh, BoundaryTag::StripBottom, -L, h_far);
  validate(mesh);
  (void)periodic_vertex_pairs(mesh);
  return mesh;
}

std::vector<std::pair<int, int>> periodic_vertex_pairs(const Mesh& strip, double tol) {
  std::map<double, int> left, right;
  for (const auto& e : strip.boundary_edges) {
    if (e.tag == BoundaryTag::StripLeft) {
      left[strip.vertices[e.a].y] = e.a;
      left[strip.vertices[e.b].y] = e.b;
    } else if (e.tag == BoundaryTag::StripRight) {
      right[strip.vertices[e.a].y] = e.a;
      right[strip.vertices[e.b].y] = e.b;
    }
  }
  if (left.size() != right.size())
    throw NumericalError("PeriodicMismatch", "left and right strip traces have different vertex counts");
  std::vector<std::pair<int, int>> pairs;
  auto it = right.begin();
  for (const auto& [y, vl] : left) {
    if (std::abs(it->first - y) > tol)
      throw NumericalError("PeriodicMismatch", "left and right strip traces are not translates");
    pairs.emplace_back(vl, it->second);
    ++it;
  }
  return pairs;
}

}  // namespace stentflow
