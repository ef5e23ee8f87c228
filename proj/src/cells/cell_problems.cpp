#include "cells/cell_problems.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "fem/element.hpp"
#include "fem/quadrature.hpp"

namespace stentflow {

Strip make_strip(const std::optional<ObstacleSpec>& obstacle, const StripSpec& spec) {
  Strip s;
  s.mesh = std::make_shared<const Mesh>(build_strip_mesh(obstacle, spec));
  s.obstacle = obstacle;
  s.L = spec.L;
  return s;
}

std::string_view to_string(CellProblem p) {
  switch (p) {
    case CellProblem::Beta: return "beta";
    case CellProblem::Upsilon: return "upsilon";
    case CellProblem::Chi: return "chi";
    case CellProblem::Varkappa: return "varkappa";
  }
  return "?";
}

namespace {

// Common strip conditions: periodic sides, vertical component `far` at y2 = +-L.
BcMap strip_bcs(const Strip& strip, double far, BcSpec obstacle) {
  BcMap m;
  m[BoundaryTag::StripLeft] = bc::natural();
  m[BoundaryTag::StripRight] = bc::periodic(BoundaryTag::StripLeft);
  m[BoundaryTag::StripTop] = bc::normal({0.0, far});
  m[BoundaryTag::StripBottom] = bc::normal({0.0, far});
  // Without an obstacle nothing fixes the horizontal component: pin it at the bottom.
  if (!strip.obstacle) m[BoundaryTag::StripBottom] = bc::dirichlet(Vec2{0.0, far});
  m[BoundaryTag::GammaEps] = std::move(obstacle);
  return m;
}

CellSolution solve_cell(CellProblem which, const Strip& strip, BcMap bcs, const StokesSources& sources,
                        const CellConfig& config) {
  auto space = std::make_shared<const FESpace>(strip.mesh, std::move(bcs));
  const StokesSystem sys = assemble_stokes(space, sources, config.assembly);
  CellSolution out;
  out.which = which;
  out.strip = strip;
  out.norm_band_lo = strip.L - 2.0;
  out.norm_band_hi = strip.L - 1.0;
  const double lo = out.norm_band_lo, hi = out.norm_band_hi;
  out.solution = solve_stokes(sys, config.solver, RegionFn([lo, hi](Point c) { return c.y >= lo && c.y <= hi; }));
  return out;
}

void require_obstacle(const Strip& strip, CellProblem p) {
  if (!strip.obstacle)
    throw ConfigError("EmptyObstacle",
                      std::string("the ") + std::string(to_string(p)) + " cell problem needs an obstacle");
}

void require_same_mesh(const CellSolution& a, const CellSolution& b) {
  if (a.strip.mesh != b.strip.mesh && !(*a.strip.mesh == *b.strip.mesh))
    throw ConfigError("MeshMismatch", std::string(to_string(a.which)) + " and " + std::string(to_string(b.which)) +
                                          " solutions live on different strip meshes");
}

TriScalarField component(const CellSolution& s, CellField f) {
  const StokesSolution& sol = s.solution;
  switch (f) {
    case CellField::U1: return [&sol](int t, const std::array<double, 3>& l, Point) { return sol.velocity_at(t, l).x; };
    case CellField::U2: return [&sol](int t, const std::array<double, 3>& l, Point) { return sol.velocity_at(t, l).y; };
    case CellField::Pressure:
      return [&sol](int t, const std::array<double, 3>& l, Point) { return sol.pressure_at(t, l); };
  }
  return {};
}

// Integral of g(tri, bary, x) over the strip with the six-point rule.
template <class G>
double integrate(const Mesh& mesh, G&& g) {
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const Element el(mesh, t);
    for (const auto& q : triangle_rule()) sum += q.weight * el.area * g(t, q.bary, el.map(q.bary));
  }
  return sum;
}

}  // namespace

CellSolution solve_beta(const Strip& strip, const CellConfig& config) {
  require_obstacle(strip, CellProblem::Beta);
  auto bcs = strip_bcs(strip, 0.0, bc::dirichlet(VectorFn([](Point p) { return Vec2{-p.y, 0.0}; })));
  return solve_cell(CellProblem::Beta, strip, std::move(bcs), {}, config);
}

CellSolution solve_upsilon(const Strip& strip, const CellConfig& config) {
  require_obstacle(strip, CellProblem::Upsilon);
  StokesSources src;
  src.lines.push_back({BoundaryTag::Sigma, {1.0, 0.0}});
  return solve_cell(CellProblem::Upsilon, strip, strip_bcs(strip, 0.0, bc::wall()), src, config);
}

CellSolution solve_chi(const Strip& strip, const CellConfig& config) {
  return solve_cell(CellProblem::Chi, strip, strip_bcs(strip, -1.0, bc::wall()), {}, config);
}

CellSolution solve_varkappa(const Strip& strip, const CellSolution& chi, const CellConfig& config) {
  if (chi.which != CellProblem::Chi) throw ConfigError("MeshMismatch", "varkappa needs the chi solution");
  if (strip.mesh != chi.strip.mesh && !(*strip.mesh == *chi.strip.mesh))
    throw ConfigError("MeshMismatch", "chi solution lives on a different strip mesh");
  const FarField eta = far_field(chi, CellField::Pressure, config.band_samples);
  const double eta_plus = eta.top.mean, eta_minus = eta.bottom.mean;
  const StokesSolution& x = chi.solution;
  const Mesh& mesh = *strip.mesh;
  StokesSources src;
  src.volume = [&x, &mesh, eta_plus, eta_minus](int t, Point p) {
    const auto l = Element(mesh, t).barycentric(p);
    const auto g = x.velocity_gradient(t, l);
    const double deta = x.pressure_at(t, l) - (p.y > 0.0 ? eta_plus : eta_minus);
    return Vec2{-2.0 * (g[0].x - deta), -2.0 * g[1].x};
  };
  return solve_cell(CellProblem::Varkappa, strip, strip_bcs(strip, 1.0, bc::wall()), src, config);
}

double section_average(const Mesh& mesh, const TriScalarField& f, double y2) {
  double sum = 0.0;
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const auto& tri = mesh.triangles[t];
    std::array<Point, 3> v;
    std::array<double, 3> s;
    for (int k = 0; k < 3; ++k) {
      v[k] = mesh.vertices[tri[k]];
      s[k] = v[k].y - y2;
    }
    if ((s[0] > 0 && s[1] > 0 && s[2] > 0) || (s[0] < 0 && s[1] < 0 && s[2] < 0)) continue;
    std::vector<Point> pts;
    int zeros = 0;
    for (int k = 0; k < 3; ++k) {
      const int j = (k + 1) % 3;
      if (s[k] == 0.0) {
        pts.push_back(v[k]);
        ++zeros;
      } else if (s[k] * s[j] < 0.0) {
        const double a = s[k] / (s[k] - s[j]);
        pts.push_back({v[k].x + a * (v[j].x - v[k].x), y2});
      }
    }
    if (pts.size() != 2) continue;
    if (zeros == 2 && std::max({s[0], s[1], s[2]}) <= 0.0) continue;
    const double len = std::abs(pts[1].x - pts[0].x);
    if (len == 0.0) continue;
    const Element el(mesh, t);
    for (const auto& q : line_rule()) {
      const Point x = pts[0] + q.t * (pts[1] - pts[0]);
      sum += q.weight * len * f(t, el.barycentric(x), x);
    }
  }
  return sum;
}

double section_average(const CellSolution& s, CellField field, double y2) {
  return section_average(*s.strip.mesh, component(s, field), y2);
}

BandStats band_average(const CellSolution& s, CellField field, double lo, double hi, int samples) {
  const auto f = component(s, field);
  std::vector<double> values(samples);
  for (int k = 0; k < samples; ++k)
    values[k] = section_average(*s.strip.mesh, f, lo + (hi - lo) * (k + 0.5) / samples);
  BandStats b;
  for (double v : values) b.mean += v / samples;
  for (double v : values) b.spread = std::max(b.spread, std::abs(v - b.mean));
  return b;
}

FarField far_field(const CellSolution& s, CellField field, int samples) {
  const double L = s.strip.L;
  return {band_average(s, field, L - 2.0, L - 1.0, samples), band_average(s, field, -L + 1.0, -L + 2.0, samples)};
}

double gradient_energy(const StokesSolution& s) {
  return integrate(s.space->mesh(), [&s](int t, const std::array<double, 3>& l, Point) {
    const auto g = s.velocity_gradient(t, l);
    return dot(g[0], g[0]) + dot(g[1], g[1]);
  });
}

CellConstants extract_constants(const CellSolution& beta, const CellSolution& upsilon, const CellSolution& chi,
                                const CellSolution* varkappa, int band_samples) {
  require_same_mesh(beta, upsilon);
  require_same_mesh(beta, chi);
  if (varkappa) require_same_mesh(beta, *varkappa);
  CellConstants c;
  c.L = beta.strip.L;
  const FarField b = far_field(beta, CellField::U1, band_samples);
  const FarField u = far_field(upsilon, CellField::U1, band_samples);
  const FarField e = far_field(chi, CellField::Pressure, band_samples);
  c.beta1_plus = b.top.mean;
  c.beta1_minus = b.bottom.mean;
  c.ups1_plus = u.top.mean;
  c.ups1_minus = u.bottom.mean;
  c.eta_plus = e.top.mean;
  c.eta_minus = e.bottom.mean;
  c.eta_jump = e.jump();
  c.beta_grad_energy = gradient_energy(beta.solution);
  c.ups_grad_energy = gradient_energy(upsilon.solution);
  c.chi_grad_energy = gradient_energy(chi.solution);
  c.obstacle_area = beta.strip.obstacle ? beta.strip.obstacle->area() : 0.0;

  if (varkappa) {
    c.varkappa1_jump = far_field(*varkappa, CellField::U1, band_samples).jump();
    c.mu_jump = far_field(*varkappa, CellField::Pressure, band_samples).jump();
    const StokesSolution& x = chi.solution;
    const StokesSolution& bs = beta.solution;
    const double ep = c.eta_plus, em = c.eta_minus;
    auto deta = [&](int t, const std::array<double, 3>& l, Point p) {
      return x.pressure_at(t, l) - (p.y > 0.0 ? ep : em);
    };
    const Mesh& mesh = *chi.strip.mesh;
    const double chi1_eta = integrate(mesh, [&](int t, const std::array<double, 3>& l, Point p) {
      return x.velocity_at(t, l).x * deta(t, l, p);
    });
    c.mu_jump_identity = -c.eta_jump - 2.0 * chi1_eta;
    const double sigma_beta = integrate(mesh, [&](int t, const std::array<double, 3>& l, Point p) {
      const auto g = x.velocity_gradient(t, l);
      const Vec2 sigma_e1{g[0].x - deta(t, l, p), g[1].x};
      const Vec2 w = bs.velocity_at(t, l) + Vec2{p.y, 0.0};
      return dot(sigma_e1, w);
    });
    c.varkappa1_jump_identity = -2.0 * sigma_beta;
  }
  return c;
}

IdentityReport check_identities(const CellSolution& beta, const CellSolution& upsilon, const CellSolution& chi,
                                const CellConstants& c, int sections) {
  IdentityReport r;
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); };
  r.beta_jump_rel = rel(c.beta1_plus - c.beta1_minus, -c.obstacle_area - c.beta_grad_energy);
  r.ups_bottom_rel = rel(c.ups1_minus, c.ups_grad_energy);
  r.ups_jump_rel = rel(c.ups1_plus - c.ups1_minus, c.beta1_minus);
  r.chi_energy_rel = rel(c.chi_grad_energy, c.eta_jump);
  if (c.mu_jump && c.mu_jump_identity) r.mu_jump_rel = rel(*c.mu_jump, *c.mu_jump_identity);

  double ob_lo = 0.0, ob_hi = 0.0;
  if (beta.strip.obstacle) {
    ob_lo = beta.strip.obstacle->center.y - beta.strip.obstacle->radius;
    ob_hi = beta.strip.obstacle->center.y + beta.strip.obstacle->radius;
  }
  const double L = beta.strip.L;
  auto max_abs = [](const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; };
  const double pi_scale = std::max(max_abs(beta.solution.pressure), 1e-300);
  const double varpi_scale = std::max(max_abs(upsilon.solution.pressure), 1e-300);
  for (int k = 0; k < sections; ++k) {
    const double y = -L + 2.0 * L * (k + 0.5) / sections;
    const bool in_obstacle = y >= std::min(0.0, ob_lo) && y <= std::max(0.0, ob_hi);
    if (!in_obstacle) {
      r.beta2_section_max = std::max(r.beta2_section_max, std::abs(section_average(beta, CellField::U2, y)));
      r.pressure_section_rel =
          std::max({r.pressure_section_rel, std::abs(section_average(beta, CellField::Pressure, y)) / pi_scale,
                    std::abs(section_average(upsilon, CellField::Pressure, y)) / varpi_scale});
    }
    r.ups2_section_max = std::max(r.ups2_section_max, std::abs(section_average(upsilon, CellField::U2, y)));
  }
  for (const CellSolution* s : {&beta, &upsilon}) {
    const FarField f = far_field(*s, CellField::U1);
    r.section_flatness_max = std::max({r.section_flatness_max, f.top.spread, f.bottom.spread});
  }
  const FarField x2 = far_field(chi, CellField::U2);
  r.section_flatness_max = std::max({r.section_flatness_max, x2.top.spread, x2.bottom.spread});
  return r;
}

namespace {

std::vector<std::pair<std::string, double>> constant_rows(const CellConstants& c) {
  std::vector<std::pair<std::string, double>> rows = {
      {"beta1_plus", c.beta1_plus},
      {"beta1_minus", c.beta1_minus},
      {"ups1_plus", c.ups1_plus},
      {"ups1_minus", c.ups1_minus},
      {"eta_plus", c.eta_plus},
      {"eta_minus", c.eta_minus},
      {"eta_jump", c.eta_jump},
      {"beta_grad_energy", c.beta_grad_energy},
      {"ups_grad_energy", c.ups_grad_energy},
      {"chi_grad_energy", c.chi_grad_energy},
      {"obstacle_area", c.obstacle_area},
      {"L", c.L},
  };
  if (c.varkappa1_jump) rows.push_back({"varkappa1_jump", *c.varkappa1_jump});
  if (c.mu_jump) rows.push_back({"mu_jump", *c.mu_jump});
  if (c.mu_jump_identity) rows.push_back({"mu_jump_identity", *c.mu_jump_identity});
  if (c.varkappa1_jump_identity) rows.push_back({"varkappa1_jump_identity", *c.varkappa1_jump_identity});
  return rows;
}

void write_provenance(std::ostream& os, const std::string& provenance) {
  std::istringstream in(provenance);
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
}

}  // namespace

void write_constants(std::ostream& os, const CellConstants& c, const std::string& provenance) {
  write_provenance(os, provenance);
  os << std::setprecision(17);
  for (const auto& [k, v] : constant_rows(c)) os << k << " = " << v << '\n';
}

void write_constants_csv(std::ostream& os, const CellConstants& c, const std::string& provenance) {
  write_provenance(os, provenance);
  os << "name,value\n" << std::setprecision(17);
  for (const auto& [k, v] : constant_rows(c)) os << k << ',' << v << '\n';
}

CellConstants read_constants(std::istream& is) {
  std::map<std::string, double> kv;
  for (std::string line; std::getline(is, line);) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("MalformedConstants", "expected key = value: " + line);
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r"), b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size() || !std::isfinite(v))
      throw ConfigError("MalformedConstants", "bad value for " + key + ": " + value);
    kv[key] = v;
  }
  auto need = [&](const char* k) {
    auto it = kv.find(k);
    if (it == kv.end()) throw ConfigError("MalformedConstants", std::string("missing key ") + k);
    return it->second;
  };
  auto maybe = [&](const char* k) -> std::optional<double> {
    auto it = kv.find(k);
    return it == kv.end() ? std::nullopt : std::optional<double>(it->second);
  };
  CellConstants c;
  c.beta1_plus = need("beta1_plus");
  c.beta1_minus = need("beta1_minus");
  c.ups1_plus = need("ups1_plus");
  c.ups1_minus = need("ups1_minus");
  c.eta_jump = need("eta_jump");
  c.eta_plus = maybe("eta_plus").value_or(0.0);
  c.eta_minus = maybe("eta_minus").value_or(c.eta_plus - c.eta_jump);
  c.beta_grad_energy = maybe("beta_grad_energy").value_or(0.0);
  c.ups_grad_energy = maybe("ups_grad_energy").value_or(0.0);
  c.chi_grad_energy = maybe("chi_grad_energy").value_or(0.0);
  c.obstacle_area = maybe("obstacle_area").value_or(0.0);
  c.L = maybe("L").value_or(0.0);
  c.varkappa1_jump = maybe("varkappa1_jump");
  c.mu_jump = maybe("mu_jump");
  c.mu_jump_identity = maybe("mu_jump_identity");
  c.varkappa1_jump_identity = maybe("varkappa1_jump_identity");
  return c;
}

void write_cell_vtk(std::ostream& os, const CellSolution& s) {
  const auto& sol = s.solution;
  std::vector<VtkPointField> fields;
  fields.push_back({"velocity", 2, sol.vertex_velocity()});
  fields.push_back({"pressure", 1, std::vector<double>(sol.pressure.data(), sol.pressure.data() + sol.pressure.size())});
  write_vtk(os, *s.strip.mesh, fields, std::string(to_string(s.which)) + " cell solution");
}

}  // namespace stentflow
