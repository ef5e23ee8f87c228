#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fem/assembly.hpp"
#include "fem/element.hpp"
#include "fem/fields.hpp"
#include "fem/quadrature.hpp"
#include "geometry/geometry.hpp"

using namespace stentflow;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

BcMap channel_bcs(double p_in, double p_out) {
  return {{BoundaryTag::Gamma1, bc::wall()},
          {BoundaryTag::Gamma2, bc::wall()},
          {BoundaryTag::GammaIn, bc::pressure(p_in)},
          {BoundaryTag::GammaOut1, bc::pressure(p_out)}};
}

std::shared_ptr<const Mesh> unit_square(int n) {
  return std::make_shared<const Mesh>(flat_channel_mesh(1.0 / n));
}

}  // namespace

TEST_CASE("triangle rule integrates degree-4 monomials exactly") {
  // Reference triangle (0,0), (1,0), (0,1): integral of x^a y^b = a! b! / (a+b+2)!.
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; a + b <= 4; ++b) {
      double s = 0.0;
      for (const auto& q : triangle_rule()) {
        const double x = q.bary[1], y = q.bary[2];
        s += 0.5 * q.weight * std::pow(x, a) * std::pow(y, b);
      }
      CHECK(s == doctest::Approx(factorial(a) * factorial(b) / factorial(a + b + 2)).epsilon(1e-14));
    }
  double w = 0.0;
  for (const auto& q : line_rule()) w += q.weight * std::pow(q.t, 5);
  CHECK(w == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("P2 shape functions form a partition of unity with zero gradient sum") {
  Mesh m = flat_channel_mesh(0.5);
  Element el(m, 1);
  const std::array<double, 3> l{0.2, 0.3, 0.5};
  const auto phi = Element::p2_values(l);
  const auto g = el.p2_grads(l);
  double s = 0.0;
  Vec2 gs{0, 0};
  for (int i = 0; i < 6; ++i) {
    s += phi[i];
    gs = gs + g[i];
  }
  CHECK(s == doctest::Approx(1.0));
  CHECK(std::abs(gs.x) < 1e-12);
  CHECK(std::abs(gs.y) < 1e-12);
}

TEST_CASE("space counts and wall constraints") {
  auto mesh = unit_square(4);
  BcMap walls{{BoundaryTag::Gamma1, bc::wall()},
              {BoundaryTag::Gamma2, bc::wall()},
              {BoundaryTag::GammaIn, bc::wall()},
              {BoundaryTag::GammaOut1, bc::wall()}};
  FESpace space(mesh, walls);
  // 25 vertices, 56 edges
  CHECK(space.n_edges() == 56);
  CHECK(space.n_velocity() == 2 * (25 + 56));
  CHECK(space.pressure_kernel());
  int fixed = 0;
  for (int node = 0; node < space.n_nodes(); ++node) {
    const Point p = space.node_point(node);
    const bool on_boundary = p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0;
    for (int c = 0; c < 2; ++c) {
      const auto& cs = space.velocity_constraints()[space.vdof(c, node)];
      CHECK((cs.kind == DofConstraint::Kind::Fixed) == on_boundary);
      if (on_boundary) {
        CHECK(cs.value == 0.0);
        ++fixed;
      }
    }
  }
  CHECK(fixed == 2 * 32);
}

TEST_CASE("tangential condition fixes the boundary-parallel component only") {
  auto mesh = unit_square(4);
  FESpace space(mesh, channel_bcs(2.0, 0.0));
  CHECK_FALSE(space.pressure_kernel());
  for (int node = 0; node < space.n_nodes(); ++node) {
    const Point p = space.node_point(node);
    if (p.x != 0.0 || p.y == 0.0 || p.y == 1.0) continue;
    CHECK(space.velocity_constraints()[space.vdof(0, node)].kind == DofConstraint::Kind::Free);
    CHECK(space.velocity_constraints()[space.vdof(1, node)].kind == DofConstraint::Kind::Fixed);
  }
  // Corners: the wall wins.
  for (int node = 0; node < space.n_vertices(); ++node) {
    const Point p = space.node_point(node);
    if ((p.x == 0.0 || p.x == 1.0) && (p.y == 0.0 || p.y == 1.0))
      CHECK(space.velocity_constraints()[space.vdof(0, node)].kind == DofConstraint::Kind::Fixed);
  }
}

TEST_CASE("missing tag is reported") {
  auto mesh = unit_square(2);
  BcMap partial{{BoundaryTag::Gamma1, bc::wall()}};
  CHECK_THROWS_AS(FESpace(mesh, partial), ConfigError);
}

TEST_CASE("conflicting Dirichlet data on a straight boundary") {
  Pslg pslg;
  const int a = pslg.add_point({0, 0}), b = pslg.add_point({0.5, 0}), c = pslg.add_point({1, 0});
  const int d = pslg.add_point({1, 1}), e = pslg.add_point({0, 1});
  pslg.add_segment(a, b, BoundaryTag::Gamma2);
  pslg.add_segment(b, c, BoundaryTag::GammaEps);
  pslg.add_segment(c, d, BoundaryTag::GammaOut1);
  pslg.add_segment(d, e, BoundaryTag::Gamma1);
  pslg.add_segment(e, a, BoundaryTag::GammaIn);
  auto mesh = std::make_shared<const Mesh>(generate_mesh(pslg, [](Point) { return 0.3; }));
  BcMap bcs{{BoundaryTag::Gamma2, bc::dirichlet(Vec2{1.0, 0.0})},
            {BoundaryTag::GammaEps, bc::dirichlet(Vec2{2.0, 0.0})},
            {BoundaryTag::GammaOut1, bc::natural()},
            {BoundaryTag::Gamma1, bc::wall()},
            {BoundaryTag::GammaIn, bc::natural()}};
  CHECK_THROWS_AS(FESpace(mesh, bcs), ConfigError);
  // Disagreement between a wall and a side whose normal carries the component is resolved.
  bcs[BoundaryTag::GammaEps] = bc::dirichlet(Vec2{1.0, 0.0});
  bcs[BoundaryTag::GammaIn] = bc::wall();
  CHECK_NOTHROW(FESpace(mesh, bcs));
}

TEST_CASE("corner rule keeps each component from the side it is normal to") {
  auto mesh = std::make_shared<const Mesh>(
      structured_rectangle({0, -1}, {1, 0}, 4, 4,
                           {BoundaryTag::Gamma2, BoundaryTag::Gamma2, BoundaryTag::Gamma0, BoundaryTag::Gamma2}));
  BcMap bcs{{BoundaryTag::Gamma2, bc::wall()}, {BoundaryTag::Gamma0, bc::dirichlet(Vec2{0.3, -0.7})}};
  FESpace space(mesh, bcs);
  for (int node = 0; node < space.n_vertices(); ++node) {
    const Point p = space.node_point(node);
    if (p.y == 0.0 && (p.x == 0.0 || p.x == 1.0)) {
      CHECK(space.velocity_constraints()[space.vdof(0, node)].value == 0.0);
      CHECK(space.velocity_constraints()[space.vdof(1, node)].value == -0.7);
    }
  }
}

TEST_CASE("stiffness annihilates constants") {
  auto g = build_macro_geometry(0.25, FlowCase::Collateral, ObstacleSpec{});
  auto mesh = std::make_shared<const Mesh>(triangulate(g, 0.2));
  BcMap bcs;
  for (auto t : kAllTags) bcs[t] = bc::natural();
  auto space = std::make_shared<const FESpace>(mesh, bcs);
  auto sys = assemble_stokes(space);
  Vec ones = Vec::Ones(space->n_velocity());
  CHECK((sys.A * ones).lpNorm<Eigen::Infinity>() < 1e-12);
  // A symmetric
  CHECK(SpMat(sys.A - SpMat(sys.A.transpose())).norm() < 1e-12 * sys.A.norm());
  // B applied to a constant velocity integrates the boundary flux only: B (1,0) = -int q n1.
  Vec ex = Vec::Zero(space->n_velocity());
  for (int k = 0; k < space->n_nodes(); ++k) ex[space->vdof(0, k)] = 1.0;
  CHECK(std::abs((sys.B * ex).sum()) < 1e-12);
}

TEST_CASE("assembly is identical across thread counts") {
  auto g = build_macro_geometry(0.25, FlowCase::Collateral, ObstacleSpec{});
  auto mesh = std::make_shared<const Mesh>(triangulate(g, 0.1));
  BcMap bcs{{BoundaryTag::Gamma1, bc::wall()},      {BoundaryTag::Gamma2, bc::wall()},
            {BoundaryTag::GammaEps, bc::wall()},    {BoundaryTag::GammaIn, bc::pressure(2.0)},
            {BoundaryTag::GammaOut1, bc::pressure(0.0)}, {BoundaryTag::GammaOut2, bc::pressure(-1.0)}};
  auto space = std::make_shared<const FESpace>(mesh, bcs);
  StokesSources src;
  src.volume = [](int, Point x) { return Vec2{std::sin(x.x), x.y * x.y}; };
  auto s1 = assemble_stokes(space, src, {1});
  auto s4 = assemble_stokes(space, src, {4});
  CHECK(SpMat(s1.A - s4.A).norm() == 0.0);
  CHECK(SpMat(s1.B - s4.B).norm() == 0.0);
  CHECK((s1.f - s4.f).norm() == 0.0);
}

TEST_CASE("natural pressure terms") {
  auto mesh = unit_square(4);
  auto space = std::make_shared<const FESpace>(mesh, channel_bcs(2.0, 0.0));
  auto sys = assemble_stokes(space);
  // -int_{x1=0} 2 v.n with n = -e1 gives +2 on the horizontal DOFs of the inlet; total = 2.
  double inlet = 0.0, other = 0.0;
  for (int node = 0; node < space->n_nodes(); ++node) {
    const double v = sys.f[space->vdof(0, node)];
    (space->node_point(node).x == 0.0 ? inlet : other) += v;
    CHECK(sys.f[space->vdof(1, node)] == 0.0);
  }
  CHECK(inlet == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(other == 0.0);
}

TEST_CASE("line source on Sigma loads the horizontal trace") {
  StripSpec spec;
  spec.L = 3.0;
  spec.h_far = spec.h_near = 0.25;
  auto mesh = std::make_shared<const Mesh>(build_strip_mesh(std::nullopt, spec));
  BcMap bcs{{BoundaryTag::StripTop, bc::natural()},
            {BoundaryTag::StripBottom, bc::natural()},
            {BoundaryTag::StripLeft, bc::natural()},
            {BoundaryTag::StripRight, bc::natural()}};
  auto space = std::make_shared<const FESpace>(mesh, bcs);
  StokesSources src;
  src.lines.push_back({BoundaryTag::Sigma, {1.0, 0.0}});
  auto sys = assemble_stokes(space, src);
  double total = 0.0, midpoints = 0.0;
  for (int node = 0; node < space->n_nodes(); ++node) {
    const double v = sys.f[space->vdof(0, node)];
    if (space->node_point(node).y != 0.0) CHECK(v == 0.0);
    total += v;
    if (node >= space->n_vertices()) midpoints += v;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-14));
  // Vertex trace functions integrate to len/6, midpoint ones to 2 len/3.
  CHECK(midpoints == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(sys.f.segment(space->n_nodes(), space->n_nodes()).norm() == 0.0);
}

TEST_CASE("periodic strip maps right DOFs onto left masters") {
  StripSpec spec;
  spec.L = 3.0;
  spec.h_far = 0.3;
  spec.h_near = 0.1;
  auto mesh = std::make_shared<const Mesh>(build_strip_mesh(ObstacleSpec{}, spec));
  BcMap bcs{{BoundaryTag::StripTop, bc::normal({0.0, 0.0})},
            {BoundaryTag::StripBottom, bc::normal({0.0, 0.0})},
            {BoundaryTag::StripLeft, bc::natural()},
            {BoundaryTag::StripRight, bc::periodic(BoundaryTag::StripLeft)},
            {BoundaryTag::GammaEps, bc::wall()}};
  FESpace space(mesh, bcs);
  CHECK(space.pressure_kernel());
  int slaves = 0;
  for (int node = 0; node < space.n_nodes(); ++node) {
    const Point p = space.node_point(node);
    const auto& c1 = space.velocity_constraints()[space.vdof(0, node)];
    if (p.x == 1.0) {
      CHECK(c1.kind == DofConstraint::Kind::Slave);
      const Point m = space.node_point(c1.master % space.n_nodes());
      CHECK(m.x == 0.0);
      CHECK(m.y == p.y);
      ++slaves;
    } else {
      CHECK(c1.kind != DofConstraint::Kind::Slave);
    }
  }
  CHECK(slaves > 0);
  // The top-right corner has its normal component fixed and is not a slave there.
  for (int node = 0; node < space.n_vertices(); ++node) {
    const Point p = space.node_point(node);
    if (p.x == 1.0 && p.y == spec.L)
      CHECK(space.velocity_constraints()[space.vdof(1, node)].kind == DofConstraint::Kind::Fixed);
    if (p.x == 1.0) CHECK(space.pressure_constraints()[node].kind == DofConstraint::Kind::Slave);
  }
}

TEST_CASE("constraint reduction") {
  SUBCASE("no constraints is the identity") {
    auto mesh = unit_square(2);
    BcMap bcs;
    for (auto t : kAllTags) bcs[t] = bc::natural();
    auto space = std::make_shared<const FESpace>(mesh, bcs);
    auto sys = assemble_stokes(space);
    auto red = apply_constraints(sys);
    CHECK(red.n_u() == space->n_velocity());
    CHECK(SpMat(red.A - sys.A).norm() == 0.0);
    CHECK(SpMat(red.B - sys.B).norm() == 0.0);
  }
  SUBCASE("all velocity DOFs fixed") {
    auto tri = std::make_shared<Mesh>();
    tri->vertices = {{0, 0}, {1, 0}, {0, 1}};
    tri->triangles = {{0, 1, 2}};
    tri->boundary_edges = {{0, 1, BoundaryTag::Gamma2}, {1, 2, BoundaryTag::Gamma1}, {2, 0, BoundaryTag::GammaIn}};
    BcMap bcs;
    for (auto t : kAllTags) bcs[t] = bc::dirichlet(Vec2{1.0, 0.0});
    auto space = std::make_shared<const FESpace>(tri, bcs);
    auto red = apply_constraints(assemble_stokes(space));
    CHECK(red.n_u() == 0);
    CHECK(red.g.norm() < 1e-15);  // constant data is divergence free
  }
  SUBCASE("periodic folding on two triangles") {
    auto mesh = std::make_shared<const Mesh>(structured_rectangle(
        {0, 0}, {1, 1}, 1, 1,
        {BoundaryTag::StripBottom, BoundaryTag::StripRight, BoundaryTag::StripTop, BoundaryTag::StripLeft}));
    BcMap bcs{{BoundaryTag::StripTop, bc::natural()},
              {BoundaryTag::StripBottom, bc::natural()},
              {BoundaryTag::StripLeft, bc::natural()},
              {BoundaryTag::StripRight, bc::periodic(BoundaryTag::StripLeft)}};
    auto space = std::make_shared<const FESpace>(mesh, bcs);
    auto sys = assemble_stokes(space);
    auto red = apply_constraints(sys);
    // Dense folding: add slave rows and columns into their masters, then drop them.
    Eigen::MatrixXd a = Eigen::MatrixXd(sys.A);
    const auto& cons = space->velocity_constraints();
    const int n = space->n_velocity();
    for (int i = 0; i < n; ++i)
      if (cons[i].kind == DofConstraint::Kind::Slave) {
        a.row(cons[i].master) += a.row(i);
        a.col(cons[i].master) += a.col(i);
      }
    std::vector<int> keep;
    for (int i = 0; i < n; ++i)
      if (cons[i].kind == DofConstraint::Kind::Free) keep.push_back(i);
    REQUIRE(static_cast<int>(keep.size()) == red.n_u());
    Eigen::MatrixXd ar = Eigen::MatrixXd(red.A);
    for (std::size_t i = 0; i < keep.size(); ++i)
      for (std::size_t j = 0; j < keep.size(); ++j) CHECK(ar(i, j) == doctest::Approx(a(keep[i], keep[j])));
  }
}

TEST_CASE("L2 norms and point location") {
  auto mesh = unit_square(4);
  TriScalarField a = [](int, const std::array<double, 3>&, Point x) { return x.x; };
  CHECK(l2_norm_diff(*mesh, a, [](Point) { return 0.0; }) == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(l2_norm_diff(*mesh, a, [](Point x) { return x.x; }) < 1e-14);
  CHECK(l2_norm_diff(*mesh, a, [](Point) { return 0.0; }, [](Point c) { return c.x < 0.5; }) ==
        doctest::Approx(std::sqrt(1.0 / 24.0)).epsilon(1e-14));
  PointLocator loc(*mesh);
  for (Point p : {Point{0.3, 0.7}, Point{0.0, 0.0}, Point{1.0, 1.0}, Point{0.25, 0.5}}) {
    auto l = loc.locate(p);
    REQUIRE(l);
    Element el(*mesh, l->tri);
    const Point q = el.map(l->bary);
    CHECK(distance(p, q) < 1e-14);
  }
  CHECK_FALSE(loc.locate({1.1, 0.5}));
  CHECK_FALSE(loc.locate({0.5, -1e-6}));
  CHECK(loc.locate({0.5, -1e-12}));
}
