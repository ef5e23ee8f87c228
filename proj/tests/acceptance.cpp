// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Usage: acceptance [criterion numbers...]  (all eight by default)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <set>
#include <string>

#include "analysis/analysis.hpp"
#include "fem/quadrature.hpp"

using namespace stentflow;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

SolverConfig quiet(SolveMethod m = SolveMethod::UzawaCG) {
  SolverConfig s;
  s.method = m;
  s.log = false;
  return s;
}

DirectConfig direct_config() {
  DirectConfig c;
  c.solver = quiet();
  return c;
}

double rel(double got, double ref) { return std::abs(got - ref) / std::abs(ref); }

// Criterion 4 and 5 share one study.
const StudyResult& default_study() {
  static const StudyResult r = [] {
    StudyConfig c;
    c.direct = direct_config();
    return convergence_study(c);
  }();
  return r;
}

Outcome poiseuille() {
  const auto t0 = std::chrono::steady_clock::now();
  auto mesh = std::make_shared<const Mesh>(flat_channel_mesh(0.05));
  auto space = std::make_shared<const FESpace>(mesh, BcMap{{BoundaryTag::Gamma1, bc::wall()},
                                                           {BoundaryTag::Gamma2, bc::wall()},
                                                           {BoundaryTag::GammaIn, bc::pressure(2.0)},
                                                           {BoundaryTag::GammaOut1, bc::pressure(0.0)}});
  const StokesSolution s = solve_stokes(assemble_stokes(space), quiet());
  double err = 0.0;
  for (int k = 0; k < space->n_nodes(); ++k) {
    const Point x = space->node_point(k);
    err = std::max({err, std::abs(s.velocity[space->vdof(0, k)] - x.y * (1.0 - x.y)),
                    std::abs(s.velocity[space->vdof(1, k)])});
  }
  for (int k = 0; k < space->n_vertices(); ++k)
    err = std::max(err, std::abs(s.pressure[k] - 2.0 * (1.0 - space->node_point(k).x)));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {err <= 1e-8 && secs < 5.0, fmt("max nodal error %.2e (<= 1e-8), %.2f s (< 5 s)", err, secs)};
}

Outcome table1() {
  const Strip strip = make_strip(ObstacleSpec{}, StripSpec{});
  CellConfig cc;
  cc.solver = quiet();
  const CellConstants k = extract_constants(solve_beta(strip, cc), solve_upsilon(strip, cc), solve_chi(strip, cc));
  const bool ok = rel(k.beta1_plus, -0.377928) <= 0.02 && rel(k.beta1_minus, -0.122114) <= 0.02 &&
                  rel(k.ups1_minus, 0.121744) <= 0.05 && std::abs(k.ups1_plus + 0.000371) <= 5e-3 &&
                  rel(k.eta_jump, 27.9435) <= 0.02;
  return {ok, fmt("beta1+ %.6f (%.2f%%), beta1- %.6f (%.2f%%), ups1- %.6f (%.2f%%), ups1+ %.6f (|d| %.1e), "
                  "[eta] %.4f (%.2f%%)",
                  k.beta1_plus, 100 * rel(k.beta1_plus, -0.377928), k.beta1_minus, 100 * rel(k.beta1_minus, -0.122114),
                  k.ups1_minus, 100 * rel(k.ups1_minus, 0.121744), k.ups1_plus, std::abs(k.ups1_plus + 0.000371),
                  k.eta_jump, 100 * rel(k.eta_jump, 27.9435))};
}

Outcome identities() {
  // Section means are a discretization defect of order h^2: this criterion runs on a strip
  // refined around the obstacle and Sigma.
  StripSpec fine;
  fine.h_near = 0.003;
  fine.near_halo = 0.3;
  fine.grading = 0.04;
  const Strip strip = make_strip(ObstacleSpec{}, fine);
  CellConfig cc;
  cc.solver = quiet();
  const CellSolution beta = solve_beta(strip, cc), ups = solve_upsilon(strip, cc), chi = solve_chi(strip, cc);
  const CellConstants k = extract_constants(beta, ups, chi);
  const IdentityReport r = check_identities(beta, ups, chi, k, 801);
  const bool ok = r.chi_energy_rel <= 0.01 && r.ups_bottom_rel <= 0.01 && r.beta_jump_rel <= 0.01 &&
                  r.beta2_section_max <= 1e-6 && r.ups2_section_max <= 1e-6 && r.pressure_section_rel <= 1e-6;
  return {ok, fmt("%zu vertices; |grad chi|^2 vs [eta] %.1e, ups1(-) vs |grad ups|^2 %.1e, beta jump %.1e (<= 1e-2); "
                  "beta2 sections %.1e, ups2 sections %.1e, pressure sections %.1e rel (<= 1e-6)",
                  strip.mesh->vertices.size(), r.chi_energy_rel, r.ups_bottom_rel, r.beta_jump_rel,
                  r.beta2_section_max, r.ups2_section_max, r.pressure_section_rel)};
}

Outcome convergence() {
  const StudyResult& r = default_study();
  bool ok = r.l2_zero && r.l2_first && r.hm1_zero && r.hm1_first;
  for (const auto& e : r.reports) ok = ok && e.ok && e.l2_vel_first < e.l2_vel_zero && e.hm1_p_first < e.hm1_p_zero;
  if (!ok) return {false, "study incomplete or first-order error not below zero-order"};
  ok = r.l2_zero->slope >= 0.7 && r.l2_zero->slope <= 1.1 && r.l2_first->slope >= 1.2 && r.hm1_zero->slope >= 0.9 &&
       r.hm1_first->slope >= 1.2;
  return {ok, fmt("L2 slopes zero %.3f in [0.7,1.1], first %.3f >= 1.2; H^-1 slopes zero %.3f >= 0.9, first %.3f >= "
                  "1.2; first < zero at every eps",
                  r.l2_zero->slope, r.l2_first->slope, r.hm1_zero->slope, r.hm1_first->slope)};
}

Outcome flowrate() {
  const StudyResult& r = default_study();
  const ZeroOrder z = zero_order(FlowData{});
  double linear = 0.0;
  for (const auto& e : r.reports)
    linear = std::max({linear, rel(e.q_formula, 2.0 * e.eps / r.constants.eta_jump),
                       rel(e.q_first_order, 2.0 * e.eps / r.constants.eta_jump)});
  linear = std::max(linear, rel(flowrate_formula(z, r.constants, 0.5), 2.0 * flowrate_formula(z, r.constants, 0.25)));
  std::string gaps;
  double previous = INFINITY, at_eighth = INFINITY;
  bool shrinking = true;
  for (const auto& e : r.reports) {
    const double gap = rel(e.q_direct, e.q_formula);
    if (e.eps == 0.125) at_eighth = gap;
    shrinking = shrinking && e.ok && gap < previous;
    previous = gap;
    gaps += fmt(" %g:%.1f%%", e.eps, 100 * gap);
  }
  const bool ok = linear <= 1e-12 && at_eighth <= 0.30 && shrinking;
  return {ok, fmt("Q = 2 eps/[eta] to %.1e; direct vs homogenized gap%s (<= 30%% at 1/8, shrinking)", linear,
                  gaps.c_str())};
}

Outcome aneurysm_pressure() {
  FlowData f;
  f.flow_case = FlowCase::Aneurysm;
  const ZeroOrder z = zero_order(f);
  const bool exact = z.p_minus == f.p_out1 + 0.5 * (f.p_in - f.p_out1);

  CellConstants table;
  table.beta1_plus = -0.377928;
  table.beta1_minus = -0.122114;
  table.ups1_plus = -0.000371;
  table.ups1_minus = 0.121744;
  table.eta_jump = 27.9435;
  auto upper = std::make_shared<const Mesh>(triangulate_subdomain(Subdomain::Upper, f.flow_case, 0.05, 0.01));
  auto lower = std::make_shared<const Mesh>(triangulate_subdomain(Subdomain::Lower, f.flow_case, 0.05, 0.01));
  const FirstOrderSolution first = solve_first_order(upper, lower, z, table, quiet());

  std::string means;
  bool within = true;
  for (double eps : {0.25, 0.125, 0.0625}) {
    const DirectSolution d = solve_direct(eps, f, ObstacleSpec{}, direct_config());
    const auto [integral, area] = integrate_p1(*d.mesh, d.solution.pressure, [](Point c) { return c.y < 0.0; });
    const double dev = std::abs(integral / area - z.p_minus);
    within = within && dev <= std::sqrt(eps);
    means += fmt(" %g:%.5f", eps, integral / area);
  }
  const bool ok = exact && std::abs(first.interface_flux) <= 1e-10 && within;
  return {ok, fmt("p0- = %g; compatibility integral %.1e (<= 1e-10); mean p_eps over Omega_2%s (|mean - 1| <= "
                  "sqrt(eps))",
                  z.p_minus, std::abs(first.interface_flux), means.c_str())};
}

Outcome vortex() {
  FlowData f;
  f.flow_case = FlowCase::Aneurysm;
  const DirectSolution stent = solve_direct(0.125, f, ObstacleSpec{}, direct_config());
  const DirectSolution bare = solve_direct(0.125, f, std::nullopt, direct_config());
  auto un = [](const DirectSolution& d, double x1, double x2) { return -direct_velocity_at(d, {x1, x2}).y; };
  const double s1 = un(stent, 0.25, 0.0), s3 = un(stent, 0.75, 0.0);
  const double b1 = un(bare, 0.25, 0.0), b3 = un(bare, 0.75, 0.0);
  const bool ok = s1 > 0.0 && s3 < 0.0 && b1 < 0.0 && b3 > 0.0;
  return {ok, fmt("u.n on Gamma0 at x1 = 1/4, 3/4: stent %+.2e %+.2e, no stent %+.2e %+.2e (expected - +); "
                  "at x2 = -1/2: stent %+.2e %+.2e, no stent %+.2e %+.2e",
                  s1, s3, b1, b3, un(stent, 0.25, -0.5), un(stent, 0.75, -0.5), un(bare, 0.25, -0.5),
                  un(bare, 0.75, -0.5))};
}

Outcome solvers() {
  auto g = build_macro_geometry(0.25, FlowCase::Collateral, ObstacleSpec{});
  auto mesh = std::make_shared<const Mesh>(triangulate(g, 0.05));
  auto space = std::make_shared<const FESpace>(mesh, direct_bcs(FlowData{}));
  const ReducedSystem red = apply_constraints(assemble_stokes(space));
  const StokesSolution uz = solve_stokes(red, quiet()), di = solve_stokes(red, quiet(SolveMethod::Direct));
  const double dof = std::max((uz.velocity - di.velocity).lpNorm<Eigen::Infinity>(),
                              (uz.pressure - di.pressure).lpNorm<Eigen::Infinity>());

  // -Laplace q = 2 pi^2 sin(pi x) sin(pi y) on the unit square, q = sin sin.
  const double pi = std::numbers::pi;
  auto exact = [pi](Point x) { return std::sin(pi * x.x) * std::sin(pi * x.y); };
  std::vector<double> errors;
  for (double h : {0.1, 0.05, 0.025}) {
    auto m = std::make_shared<const Mesh>(flat_channel_mesh(h));
    const PoissonResult r = solve_poisson(m, [&](int, const std::array<double, 3>&, Point x) {
      return 2 * pi * pi * exact(x);
    });
    double e2 = 0.0;
    for (int t = 0; t < static_cast<int>(m->triangles.size()); ++t) {
      const auto& v = m->triangles[t];
      const double area = m->signed_area(t);
      for (const auto& q : triangle_rule()) {
        const Point x = q.bary[0] * m->vertices[v[0]] + q.bary[1] * m->vertices[v[1]] + q.bary[2] * m->vertices[v[2]];
        const double qh = q.bary[0] * r.coefficients[v[0]] + q.bary[1] * r.coefficients[v[1]] +
                          q.bary[2] * r.coefficients[v[2]];
        e2 += area * q.weight * (qh - exact(x)) * (qh - exact(x));
      }
    }
    errors.push_back(std::sqrt(e2));
  }
  const double o1 = std::log2(errors[0] / errors[1]), o2 = std::log2(errors[1] / errors[2]);
  const bool ok = dof <= 1e-8 && o1 >= 1.9 && o2 >= 1.9;
  return {ok, fmt("Uzawa CG vs direct max DOF difference %.1e (<= 1e-8); P1 Poisson L2 orders %.3f, %.3f (>= 1.9)",
                  dof, o1, o2)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"Poiseuille exactness", poiseuille},
      {"Table 1 reproduction", table1},
      {"Cell identity suite", identities},
      {"Convergence bands", convergence},
      {"Flow-rate law", flowrate},
      {"Aneurysm pressure averaging", aneurysm_pressure},
      {"Vortex inversion", vortex},
      {"Solver cross-validation", solvers}};
  std::set<int> only;
  for (int k = 1; k < argc; ++k) only.insert(std::atoi(argv[k]));

  int failed = 0;
  for (int k = 0; k < 8; ++k) {
    if (!only.empty() && !only.count(k + 1)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    std::printf("[%s] %d. %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, o.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
