#include <cmath>
#include <numbers>
#include <sstream>

#include "cells/cell_problems.hpp"
#include "doctest.h"

using namespace stentflow;

namespace {

CellConfig quiet() {
  CellConfig c;
  c.solver.log = false;
  return c;
}

struct ReferenceCells {
  Strip strip;
  CellSolution beta, upsilon, chi, varkappa;
  CellConstants constants;
};

const ReferenceCells& reference() {
  static const ReferenceCells* cells = [] {
    auto* r = new ReferenceCells;
    r->strip = make_strip(ObstacleSpec{}, StripSpec{});
    r->beta = solve_beta(r->strip, quiet());
    r->upsilon = solve_upsilon(r->strip, quiet());
    r->chi = solve_chi(r->strip, quiet());
    r->varkappa = solve_varkappa(r->strip, r->chi, quiet());
    r->constants = extract_constants(r->beta, r->upsilon, r->chi, &r->varkappa);
    return r;
  }();
  return *cells;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Largest |mean pressure| over sections below Sigma and above the obstacle, relative to max |p|.
double pressure_section_defect(const CellSolution& s) {
  const ObstacleSpec o = *s.strip.obstacle;
  double worst = 0.0;
  for (double y = -s.strip.L + 0.05; y < s.strip.L; y += 0.05) {
    if (y >= 0.0 && y <= o.center.y + o.radius) continue;
    worst = std::max(worst, std::abs(section_average(s, CellField::Pressure, y)));
  }
  return worst / s.solution.pressure.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("reference disk reproduces the homogenized constants table") {
  const CellConstants& c = reference().constants;
  CHECK(rel(c.beta1_plus, -0.377928) <= 0.02);
  CHECK(rel(c.beta1_minus, -0.122114) <= 0.02);
  CHECK(rel(c.ups1_minus, 0.121744) <= 0.05);
  CHECK(std::abs(c.ups1_plus - (-0.000371269)) <= 5e-3);
  CHECK(rel(c.eta_jump, 27.9435) <= 0.02);
  CHECK(c.eta_jump > 0.0);
  CHECK(c.obstacle_area == doctest::Approx(std::numbers::pi * 9.0 / 256.0).epsilon(1e-15));
}

TEST_CASE("averaged identities of the cell problems") {
  const auto& r = reference();
  const CellConstants& c = r.constants;
  CHECK(rel(c.beta1_plus - c.beta1_minus, -c.obstacle_area - c.beta_grad_energy) <= 0.01);
  CHECK(rel(c.ups1_minus, c.ups_grad_energy) <= 0.01);
  CHECK(rel(c.ups1_plus - c.ups1_minus, c.beta1_minus) <= 0.01);
  CHECK(rel(c.chi_grad_energy, c.eta_jump) <= 0.01);
  REQUIRE(c.mu_jump);
  CHECK(rel(*c.mu_jump, *c.mu_jump_identity) <= 0.02);
  CHECK(rel(*c.varkappa1_jump, *c.varkappa1_jump_identity) <= 0.02);

  const IdentityReport rep = check_identities(r.beta, r.upsilon, r.chi, c);
  CHECK(rep.beta_jump_rel <= 0.01);
  CHECK(rep.beta2_section_max <= 1e-6);
  CHECK(rep.ups2_section_max <= 1e-6);
  CHECK(rep.section_flatness_max <= 1e-6);
  REQUIRE(rep.mu_jump_rel);
  CHECK(*rep.mu_jump_rel <= 0.02);
}

TEST_CASE("far fields are flat and the varkappa band has no section variance") {
  const auto& r = reference();
  const FarField chi2 = far_field(r.chi, CellField::U2);
  CHECK(chi2.top.mean == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK(chi2.bottom.mean == doctest::Approx(-1.0).epsilon(1e-9));
  const FarField k = far_field(r.varkappa, CellField::U1);
  CHECK(k.top.spread <= 1e-6);
  CHECK(k.bottom.spread <= 1e-6);
  // Pressure normalized over the top band.
  CHECK(std::abs(far_field(r.beta, CellField::Pressure).top.mean) <= 1e-9);
}

TEST_CASE("Dirichlet data on the obstacle hold exactly") {
  const auto& r = reference();
  const FESpace& sp = *r.beta.solution.space;
  int checked = 0;
  for (const auto& e : sp.mesh().boundary_edges) {
    if (e.tag != BoundaryTag::GammaEps) continue;
    for (int node : {e.a, e.b, sp.n_vertices() + sp.edge_index(e.a, e.b)}) {
      const Point x = sp.node_point(node);
      CHECK(r.beta.solution.velocity[sp.vdof(0, node)] == -x.y);
      CHECK(r.beta.solution.velocity[sp.vdof(1, node)] == 0.0);
      CHECK(r.chi.solution.velocity[sp.vdof(0, node)] == 0.0);
      CHECK(r.upsilon.solution.velocity[sp.vdof(1, node)] == 0.0);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("truncation height does not change the constants") {
  StripSpec tall;
  tall.L = 14.0;
  const Strip s = make_strip(ObstacleSpec{}, tall);
  const auto b = solve_beta(s, quiet()), u = solve_upsilon(s, quiet()), x = solve_chi(s, quiet());
  const CellConstants c14 = extract_constants(b, u, x);
  const CellConstants& c10 = reference().constants;
  CHECK(std::abs(c14.beta1_plus - c10.beta1_plus) < 1e-6);
  CHECK(std::abs(c14.beta1_minus - c10.beta1_minus) < 1e-6);
  CHECK(std::abs(c14.ups1_plus - c10.ups1_plus) < 1e-6);
  CHECK(std::abs(c14.ups1_minus - c10.ups1_minus) < 1e-6);
  CHECK(std::abs(c14.eta_jump - c10.eta_jump) < 1e-6);
}

TEST_CASE("pressure section averages vanish under refinement") {
  const double coarse = pressure_section_defect(reference().beta);
  StripSpec fine;
  fine.h_near = 0.015;
  const CellSolution b = solve_beta(make_strip(ObstacleSpec{}, fine), quiet());
  const double finer = pressure_section_defect(b);
  MESSAGE("pressure section defect: " << coarse << " -> " << finer);
  CHECK(finer < coarse / 2.5);
}

TEST_CASE("section average of known fields") {
  const auto& r = reference();
  const Mesh& mesh = *r.strip.mesh;
  const TriScalarField one = [](int, const std::array<double, 3>&, Point) { return 3.5; };
  const TriScalarField x1 = [](int, const std::array<double, 3>&, Point x) { return x.x; };
  CHECK(section_average(mesh, one, -3.3) == doctest::Approx(3.5).epsilon(1e-13));
  CHECK(section_average(mesh, x1, -3.3) == doctest::Approx(0.5).epsilon(1e-13));
  // Lines that coincide with mesh edges are counted once.
  CHECK(section_average(mesh, one, 0.0) == doctest::Approx(3.5).epsilon(1e-13));
  double row = 0.0;
  for (const auto& p : mesh.vertices)
    if (p.y < 9.5) row = std::max(row, p.y);
  CHECK(section_average(mesh, one, row) == doctest::Approx(3.5).epsilon(1e-13));
  // Through the obstacle only the fluid part counts.
  CHECK(section_average(mesh, one, 0.25) < 3.5 * (1.0 - 2.0 * 3.0 / 16.0) + 1e-3);
}

TEST_CASE("unobstructed strip: chi is -e2 and varkappa is e2") {
  StripSpec spec;
  spec.L = 4.0;
  spec.h_near = spec.h_far = 0.25;
  const Strip s = make_strip(std::nullopt, spec);
  const auto chi = solve_chi(s, quiet());
  for (int d = 0; d < chi.solution.velocity.size(); ++d) {
    const double expected = d < chi.solution.space->n_nodes() ? 0.0 : -1.0;
    CHECK(std::abs(chi.solution.velocity[d] - expected) <= 1e-10);
  }
  CHECK(std::abs(far_field(chi, CellField::Pressure).jump()) <= 1e-10);
  const auto k = solve_varkappa(s, chi, quiet());
  CHECK(std::abs(far_field(k, CellField::U2).top.mean - 1.0) <= 1e-10);
  CHECK(std::abs(far_field(k, CellField::U1).jump()) <= 1e-10);
  CHECK(std::abs(far_field(k, CellField::Pressure).jump()) <= 1e-10);
  CHECK_THROWS_AS(solve_beta(s, quiet()), ConfigError);
  CHECK_THROWS_AS(solve_upsilon(s, quiet()), ConfigError);
}

TEST_CASE("varkappa requires chi on the same mesh") {
  const auto& r = reference();
  StripSpec other;
  other.h_near = 0.05;
  const Strip s = make_strip(ObstacleSpec{}, other);
  try {
    solve_varkappa(s, r.chi, quiet());
    FAIL("expected MeshMismatch");
  } catch (const ConfigError& e) {
    CHECK(e.kind() == "MeshMismatch");
  }
}

TEST_CASE("constants survive a text round trip") {
  const CellConstants& c = reference().constants;
  std::stringstream ss;
  write_constants(ss, c, "strip L=10");
  const CellConstants back = read_constants(ss);
  CHECK(back.beta1_plus == c.beta1_plus);
  CHECK(back.ups1_plus == c.ups1_plus);
  CHECK(back.eta_jump == c.eta_jump);
  CHECK(back.mu_jump == c.mu_jump);
  std::istringstream bad("beta1_plus = x\n");
  CHECK_THROWS_AS(read_constants(bad), ConfigError);
  std::istringstream missing("beta1_plus = 1\n");
  CHECK_THROWS_AS(read_constants(missing), ConfigError);
}
