#include <cmath>
#include <numbers>

#include "analysis/analysis.hpp"
#include "doctest.h"

using namespace stentflow;

namespace {

SolverConfig quiet() {
  SolverConfig s;
  s.log = false;
  return s;
}

DirectSolution flat_channel(double h, double p_in) {
  DirectSolution d;
  d.geometry = build_macro_geometry(1.0, FlowCase::Collateral, std::nullopt);
  d.mesh = std::make_shared<const Mesh>(flat_channel_mesh(h));
  auto space = std::make_shared<const FESpace>(
      d.mesh, BcMap{{BoundaryTag::Gamma1, bc::wall()},
                    {BoundaryTag::Gamma2, bc::wall()},
                    {BoundaryTag::GammaIn, bc::pressure(p_in)},
                    {BoundaryTag::GammaOut1, bc::pressure(0.0)}});
  d.solution = solve_stokes(assemble_stokes(space), quiet());
  return d;
}

DirectConfig direct_config() {
  DirectConfig c;
  c.solver = quiet();
  return c;
}

}  // namespace

TEST_CASE("slope fit") {
  const std::vector<double> eps{1.0, 0.25, 0.125, 0.0625};
  std::vector<double> err;
  for (double e : eps) err.push_back(e == 1.0 ? 123.0 : 0.7 * std::pow(e, 1.37));
  const SlopeFit f = fit_slope(eps, err);
  CHECK(f.points == 3);
  CHECK(std::abs(f.slope - 1.37) <= 1e-12);
  CHECK(std::abs(f.intercept - std::log(0.7)) <= 1e-12);
  CHECK(f.residual <= 1e-12);
  CHECK_THROWS_AS(fit_slope({0.25, 0.125}, {1.0, 0.5}), ConfigError);
  CHECK_THROWS_AS(fit_slope({0.25, 0.125, 0.1}, {1.0, 0.0, 0.5}), ConfigError);
}

TEST_CASE("error norms of exact approximations") {
  const DirectSolution d = flat_channel(0.1, 2.0);
  const double e = l2_velocity_error(d, [](Point x) { return Vec2{x.y * (1.0 - x.y), 0.0}; });
  CHECK(e <= 1e-9);
  const double p = hm1_pressure_error(d, [](Point x) { return 2.0 * (1.0 - x.x); });
  CHECK(p <= 1e-9);

  auto loc = std::make_shared<const PointLocator>(*d.mesh);
  CHECK(l2_velocity_error(d, velocity_evaluator(d.solution, loc)) <= 1e-14);
}

TEST_CASE("H^-1 pressure norm against a manufactured solution") {
  const DirectSolution rest = flat_channel(0.05, 0.0);
  const double pi = std::numbers::pi;
  const double got =
      hm1_pressure_error(rest, [pi](Point x) { return -std::sin(pi * x.x) * std::sin(pi * x.y); });
  // q = sin sin / (2 pi^2), |grad q| = 1 / (2 sqrt(2) pi).
  const double exact = 1.0 / (2.0 * std::sqrt(2.0) * pi);
  CHECK(std::abs(got - exact) / exact <= 0.02);
}

TEST_CASE("mass conservation of the direct collateral solve") {
  const DirectSolution d = solve_direct(0.25, FlowData{}, ObstacleSpec{}, direct_config());
  const StokesSolution& s = d.solution;
  const double in = -boundary_flux(s, BoundaryTag::GammaIn);
  const double out1 = boundary_flux(s, BoundaryTag::GammaOut1);
  const double out2 = boundary_flux(s, BoundaryTag::GammaOut2);
  const double q = flowrate_direct(s);
  CHECK(in > 0.0);
  CHECK(std::abs(in - out1 - out2) <= 1e-9);
  // Taylor-Hood conserves mass against P1 tests only: the Omega_2 balance holds up to the
  // discretization error (1.8e-6 at h = 0.05, 2.4e-7 at h = 0.025).
  CHECK(std::abs(out2 - q) <= 1e-3 * q);
  CHECK(std::abs(boundary_flux(s, BoundaryTag::GammaEps)) <= 1e-14);
}

TEST_CASE("convergence study over eps") {
  StudyConfig c;
  c.direct = direct_config();
  c.eps_list = {0.25, 0.125, 0.0625, 0.3};
  const StudyResult r = convergence_study(c);
  REQUIRE(r.reports.size() == 4);
  CHECK_FALSE(r.reports[3].ok);
  CHECK(r.reports[3].diagnostic.find("NonIntegerReciprocal") != std::string::npos);
  for (int k = 0; k < 3; ++k) {
    const ErrorReport& e = r.reports[k];
    REQUIRE(e.ok);
    CHECK(e.l2_vel_first < e.l2_vel_zero);
    CHECK(e.hm1_p_first < e.hm1_p_zero);
    CHECK(e.q_direct > 0.0);
    CHECK(e.q_first_order == doctest::Approx(e.q_formula).epsilon(1e-12));
  }
  CHECK(r.reports[0].q_direct > r.reports[1].q_direct);
  CHECK(r.reports[1].q_direct > r.reports[2].q_direct);
  REQUIRE(r.l2_first);
  CHECK(r.l2_first->slope > r.l2_zero->slope);
  CHECK(r.hm1_first->slope > r.hm1_zero->slope);
}

TEST_CASE("aneurysm: sac circulation with and without stent") {
  FlowData f;
  f.flow_case = FlowCase::Aneurysm;
  const DirectSolution stent = solve_direct(0.125, f, ObstacleSpec{}, direct_config());
  const DirectSolution bare = solve_direct(0.125, f, std::nullopt, direct_config());
  // u.n with n = -e2 (into the sac).
  auto un = [](const DirectSolution& d, double x1, double x2) { return -direct_velocity_at(d, {x1, x2}).y; };
  CHECK(un(stent, 0.25, 0.0) > 0.0);
  CHECK(un(stent, 0.75, 0.0) < 0.0);
  // Without the stent the main flow dips into the mouth of the sac with the same sign pattern
  // on Gamma0, while the circulation at mid depth is reversed.
  CHECK(un(bare, 0.25, 0.0) > 0.0);
  CHECK(un(bare, 0.75, 0.0) < 0.0);
  CHECK(un(stent, 0.25, -0.5) > 0.0);
  CHECK(un(bare, 0.25, -0.5) < 0.0);
  CHECK(un(bare, 0.75, -0.5) > 0.0);

  const double net = flowrate_direct(stent.solution);
  double half = 0.0;
  for (int k = 0; k < 64; ++k) half += un(stent, (k + 0.5) / 128.0, 0.0) / 128.0;
  CHECK(half > 0.0);
  CHECK(std::abs(net) <= 1e-3 * half);
}
