#include "analysis/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "fem/element.hpp"
#include "fem/quadrature.hpp"

namespace stentflow {

BcMap direct_bcs(const FlowData& flow) {
  BcMap m{{BoundaryTag::Gamma1, bc::wall()},
          {BoundaryTag::Gamma2, bc::wall()},
          {BoundaryTag::GammaEps, bc::wall()},
          {BoundaryTag::GammaIn, bc::pressure(flow.p_in)},
          {BoundaryTag::GammaOut1, bc::pressure(flow.p_out1)}};
  m[BoundaryTag::GammaOut2] = flow.flow_case == FlowCase::Collateral ? bc::pressure(flow.p_out2) : bc::wall();
  return m;
}

DirectSolution solve_direct(double eps, const FlowData& flow, const std::optional<ObstacleSpec>& obstacle,
                            const DirectConfig& config) {
  flow.validate();
  DirectSolution d;
  d.geometry = build_macro_geometry(eps, flow.flow_case, obstacle);
  d.mesh = std::make_shared<const Mesh>(triangulate(d.geometry, config.h, config.refine));
  auto space = std::make_shared<const FESpace>(d.mesh, direct_bcs(flow));
  d.solution = solve_stokes(assemble_stokes(space, {}, config.assembly), config.solver);
  return d;
}

namespace {

// Simpson rule on the P2 trace of one edge.
double edge_flux(const StokesSolution& s, int a, int b, Vec2 n) {
  const FESpace& sp = *s.space;
  const int m = sp.n_vertices() + sp.edge_index(a, b);
  const double len = distance(sp.mesh().vertices[a], sp.mesh().vertices[b]);
  double sum = 0.0;
  for (int c = 0; c < 2; ++c) {
    const double nc = c == 0 ? n.x : n.y;
    sum += nc * (s.velocity[sp.vdof(c, a)] + 4.0 * s.velocity[sp.vdof(c, m)] + s.velocity[sp.vdof(c, b)]);
  }
  return len * sum / 6.0;
}

}  // namespace

double boundary_flux(const StokesSolution& s, BoundaryTag tag) {
  const Mesh& mesh = s.space->mesh();
  double q = 0.0;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != tag) continue;
    const Vec2 d = mesh.vertices[e.b] - mesh.vertices[e.a];
    q += edge_flux(s, e.a, e.b, (1.0 / norm(d)) * Vec2{d.y, -d.x});
  }
  return q;
}

double flowrate_direct(const StokesSolution& s) {
  double q = 0.0;
  for (const auto& e : s.space->mesh().interface_edges)
    if (e.tag == BoundaryTag::Gamma0) q += edge_flux(s, e.a, e.b, {0.0, -1.0});
  return q;
}

double l2_velocity_error(const DirectSolution& d, const std::function<Vec2(Point)>& approx) {
  const Mesh& mesh = *d.mesh;
  const double fluid = l2_norm_diff(mesh, velocity_field(d.solution), approx);
  // Inside the obstacles the direct field is zero: integrate |approx|^2 over the polygonal holes.
  double holes = 0.0;
  const double eps = d.geometry.eps;
  for (const auto& e : mesh.boundary_edges) {
    if (e.tag != BoundaryTag::GammaEps || d.geometry.holes.empty()) continue;
    const Point a = mesh.vertices[e.a], b = mesh.vertices[e.b];
    const int k = std::clamp(static_cast<int>(std::floor(0.5 * (a.x + b.x) / eps)), 0,
                             static_cast<int>(d.geometry.holes.size()) - 1);
    const Point c = d.geometry.holes[k].center;
    const double area = 0.5 * std::abs((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
    for (const auto& q : triangle_rule()) {
      const Point x = q.bary[0] * a + q.bary[1] * b + q.bary[2] * c;
      const Vec2 u = approx(x);
      holes += q.weight * area * dot(u, u);
    }
  }
  return std::sqrt(fluid * fluid + holes);
}

double hm1_pressure_error(const DirectSolution& d, const std::function<double(Point)>& approx) {
  const StokesSolution& s = d.solution;
  const TriScalarField rhs = [&s, &approx](int t, const std::array<double, 3>& l, Point x) {
    return s.pressure_at(t, l) - approx(x);
  };
  return solve_poisson(d.mesh, rhs, {}, 1).gradient_norm;
}

SlopeFit fit_slope(const std::vector<double>& eps, const std::vector<double>& error) {
  if (eps.size() != error.size()) throw ConfigError("InvalidArgument", "slope fit needs paired data");
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < eps.size(); ++k) {
    if (eps[k] == 1.0) continue;
    if (!(eps[k] > 0.0) || !(error[k] > 0.0))
      throw ConfigError("InvalidArgument", "slope fit needs positive eps and errors");
    xs.push_back(std::log(eps[k]));
    ys.push_back(std::log(error[k]));
  }
  const int n = static_cast<int>(xs.size());
  if (n < 3) throw ConfigError("TooFewPoints", "slope fit needs at least 3 values of eps below 1");
  double mx = 0.0, my = 0.0;
  for (int k = 0; k < n; ++k) {
    mx += xs[k] / n;
    my += ys[k] / n;
  }
  double sxx = 0.0, sxy = 0.0;
  for (int k = 0; k < n; ++k) {
    sxx += (xs[k] - mx) * (xs[k] - mx);
    sxy += (xs[k] - mx) * (ys[k] - my);
  }
  if (!(sxx > 0.0)) throw ConfigError("InvalidArgument", "slope fit needs distinct eps values");
  SlopeFit f;
  f.points = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double r2 = 0.0;
  for (int k = 0; k < n; ++k) {
    const double r = ys[k] - (f.intercept + f.slope * xs[k]);
    r2 += r * r;
  }
  f.residual = std::sqrt(r2 / n);
  return f;
}

Vec2 direct_velocity_at(const DirectSolution& d, Point x) {
  const PointLocator loc(*d.mesh);
  const auto l = loc.locate(x, 1e-8);
  if (!l) throw NumericalError("PointLocationFailure", "point outside the direct mesh");
  return d.solution.velocity_at(l->tri, l->bary);
}

void write_profiles_csv(std::ostream& os, const DirectSolution& d, const AveragedApproximation& a, int samples,
                        const std::string& provenance) {
  std::istringstream in(provenance);
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
  const PointLocator loc(*d.mesh);
  auto direct = [&](Point x) {
    const auto l = loc.locate(x, 1e-8);
    if (!l) throw NumericalError("PointLocationFailure", "profile point outside the direct mesh");
    return d.solution.velocity_at(l->tri, l->bary);
  };
  const double eps = d.geometry.eps;
  os << "x1,u_eps_1_at_eps,ubar_1_at_eps,u_eps_2_at_0,ubar_2_at_0\n" << std::setprecision(12);
  for (int k = 0; k < samples; ++k) {
    const double x1 = (k + 0.5) / samples;
    os << x1 << ',' << direct({x1, eps}).x << ',' << a.velocity({x1, eps}).x << ',' << direct({x1, 0.0}).y << ','
       << a.velocity_on_interface(x1, Subdomain::Upper).y << '\n';
  }
}

StudyResult convergence_study(const StudyConfig& config) {
  config.flow.validate();
  StudyResult r;
  if (config.constants) {
    r.constants = *config.constants;
  } else {
    const Strip strip = make_strip(config.obstacle, config.strip);
    CellConfig cc;
    cc.solver = config.direct.solver;
    cc.assembly = config.direct.assembly;
    const auto beta = solve_beta(strip, cc), ups = solve_upsilon(strip, cc), chi = solve_chi(strip, cc);
    r.constants = extract_constants(beta, ups, chi);
  }
  const ZeroOrder z = zero_order(config.flow);
  auto upper = std::make_shared<const Mesh>(triangulate_subdomain(Subdomain::Upper, config.flow.flow_case, config.h_sub,
                                                                  config.h_sub_interface, config.direct.refine));
  auto lower = std::make_shared<const Mesh>(triangulate_subdomain(Subdomain::Lower, config.flow.flow_case, config.h_sub,
                                                                  config.h_sub_interface, config.direct.refine));
  const FirstOrderSolution first =
      solve_first_order(upper, lower, z, r.constants, config.direct.solver, config.direct.assembly);

  const AveragedApproximation zero(z, nullptr, 0.0);
  auto run = [&](double eps) {
    ErrorReport rep;
    rep.eps = eps;
    try {
      const DirectSolution d = solve_direct(eps, config.flow, config.obstacle, config.direct);
      const AveragedApproximation avg(z, &first, eps);
      rep.mesh_vertices = static_cast<int>(d.mesh->vertices.size());
      rep.mesh_triangles = static_cast<int>(d.mesh->triangles.size());
      rep.solver = d.solution.diagnostics.method;
      if (!d.solution.diagnostics.converged) throw NumericalError("NonConvergence", "direct solve did not converge");
      rep.l2_vel_zero = l2_velocity_error(d, [&](Point x) { return zero.velocity(x); });
      rep.l2_vel_first = l2_velocity_error(d, [&](Point x) { return avg.velocity(x); });
      rep.hm1_p_zero = hm1_pressure_error(d, [&](Point x) { return zero.pressure(x); });
      rep.hm1_p_first = hm1_pressure_error(d, [&](Point x) { return avg.pressure(x); });
      rep.q_direct = flowrate_direct(d.solution);
      rep.q_formula = flowrate_formula(z, r.constants, eps);
      rep.q_first_order = flowrate_first_order(first, eps);
      if (!config.output_dir.empty()) {
        char name[64];
        std::snprintf(name, sizeof name, "/profiles_eps%g.csv", eps);
        std::ofstream f(config.output_dir + name);
        if (!f) throw NumericalError("IoError", "cannot write " + config.output_dir + name);
        write_profiles_csv(f, d, avg, config.profile_samples, config.provenance);
      }
    } catch (const Error& e) {
      rep.ok = false;
      rep.diagnostic = e.kind() + ": " + e.what();
    }
    return rep;
  };

  const int n = static_cast<int>(config.eps_list.size());
  r.reports.resize(n);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < n; k = next++) r.reports[k] = run(config.eps_list[k]);
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < std::min(config.threads, n); ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::vector<double> es, l0, l1, h0, h1;
  for (const auto& rep : r.reports) {
    if (!rep.ok) continue;
    es.push_back(rep.eps);
    l0.push_back(rep.l2_vel_zero);
    l1.push_back(rep.l2_vel_first);
    h0.push_back(rep.hm1_p_zero);
    h1.push_back(rep.hm1_p_first);
  }
  auto fit = [&](const std::vector<double>& e) -> std::optional<SlopeFit> {
    try {
      return fit_slope(es, e);
    } catch (const ConfigError&) {
      return std::nullopt;
    }
  };
  r.l2_zero = fit(l0);
  r.l2_first = fit(l1);
  r.hm1_zero = fit(h0);
  r.hm1_first = fit(h1);
  return r;
}

void write_errors_csv(std::ostream& os, const StudyResult& r, const std::string& provenance) {
  std::istringstream in(provenance);
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
  os << "eps,l2_vel_zero,l2_vel_first,hm1_p_zero,hm1_p_first,q_direct,q_formula,q_first_order\n"
     << std::setprecision(12);
  for (const auto& e : r.reports) {
    if (!e.ok) {
      os << "# eps=" << e.eps << " failed: " << e.diagnostic << '\n';
      continue;
    }
    os << e.eps << ',' << e.l2_vel_zero << ',' << e.l2_vel_first << ',' << e.hm1_p_zero << ',' << e.hm1_p_first << ','
       << e.q_direct << ',' << e.q_formula << ',' << e.q_first_order << '\n';
  }
}

}  // namespace stentflow
