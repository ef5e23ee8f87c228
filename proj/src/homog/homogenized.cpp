#include "homog/homogenized.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "fem/element.hpp"

namespace stentflow {

void FlowData::validate() const {
  if (!std::isfinite(p_in) || !std::isfinite(p_out1) || !std::isfinite(p_out2))
    throw ConfigError("InvalidFlowData", "prescribed pressures must be finite");
}

Vec2 ZeroOrder::velocity(Point x) const {
  if (x.y <= 0.0 || x.y >= 1.0) return {0.0, 0.0};
  return {shear() * x.y * (1.0 - x.y), 0.0};
}

double ZeroOrder::pressure(Point x) const { return x.y >= 0.0 ? pressure_upper(x.x) : p_minus; }

ZeroOrder zero_order(const FlowData& flow) {
  flow.validate();
  ZeroOrder z;
  z.flow = flow;
  z.p_minus = flow.flow_case == FlowCase::Collateral ? flow.p_out2 : flow.p_out1 + 0.5 * (flow.p_in - flow.p_out1);
  return z;
}

Vec2 interface_dirichlet(const ZeroOrder& z, const CellConstants& c, Subdomain side, double x1) {
  const double slip = side == Subdomain::Upper ? c.beta1_plus + c.ups1_plus : c.beta1_minus + c.ups1_minus;
  return {z.shear() * slip, -z.pressure_jump(x1) / c.eta_jump};
}

namespace {

BcMap upper_bcs(const ZeroOrder& z, const CellConstants& c) {
  return {{BoundaryTag::Gamma0,
           bc::dirichlet(VectorFn([z, c](Point p) { return interface_dirichlet(z, c, Subdomain::Upper, p.x); }))},
          {BoundaryTag::Gamma1, bc::wall()},
          {BoundaryTag::GammaIn, bc::pressure(0.0)},
          {BoundaryTag::GammaOut1, bc::pressure(0.0)}};
}

BcMap lower_bcs(const ZeroOrder& z, const CellConstants& c) {
  BcMap m{{BoundaryTag::Gamma0,
           bc::dirichlet(VectorFn([z, c](Point p) { return interface_dirichlet(z, c, Subdomain::Lower, p.x); }))},
          {BoundaryTag::Gamma2, bc::wall()}};
  if (z.flow.flow_case == FlowCase::Collateral)
    m[BoundaryTag::GammaOut2] = bc::pressure(0.0);
  else
    m[BoundaryTag::GammaOut2] = bc::wall();
  return m;
}

// Integral of the Gamma0 trace of component c, Simpson rule per edge on the P2 values.
double gamma0_integral(const FESpace& sp, const Vec& u, int c) {
  double sum = 0.0;
  auto edges = [&](const std::vector<TaggedEdge>& list) {
    for (const auto& e : list) {
      if (e.tag != BoundaryTag::Gamma0) continue;
      const int m = sp.n_vertices() + sp.edge_index(e.a, e.b);
      const double len = distance(sp.mesh().vertices[e.a], sp.mesh().vertices[e.b]);
      sum += len * (u[sp.vdof(c, e.a)] + 4.0 * u[sp.vdof(c, m)] + u[sp.vdof(c, e.b)]) / 6.0;
    }
  };
  edges(sp.mesh().boundary_edges);
  return sum;
}

}  // namespace

FirstOrderSolution solve_first_order(std::shared_ptr<const Mesh> upper, std::shared_ptr<const Mesh> lower,
                                     const ZeroOrder& z, const CellConstants& c, const SolverConfig& solver,
                                     const AssemblyOptions& assembly) {
  if (!(c.eta_jump > 0.0)) throw ConfigError("InvalidConstants", "[eta] must be positive");
  FirstOrderSolution out;
  auto up_space = std::make_shared<const FESpace>(std::move(upper), upper_bcs(z, c));
  auto lo_space = std::make_shared<const FESpace>(std::move(lower), lower_bcs(z, c));

  const std::vector<double> ud = lo_space->dirichlet_vector();
  out.interface_flux = gamma0_integral(*lo_space, Eigen::Map<const Vec>(ud.data(), ud.size()), 1);
  const bool closed = z.flow.flow_case == FlowCase::Aneurysm;
  if (closed && std::abs(out.interface_flux) > 1e-10) {
    std::ostringstream msg;
    msg << "interface data of the closed lower domain carry a net flux " << out.interface_flux;
    throw NumericalError("CompatibilityFailure", msg.str());
  }

  out.upper = solve_stokes(assemble_stokes(up_space, {}, assembly), solver);
  std::optional<RegionFn> whole;
  if (closed) whole = RegionFn{};
  out.lower = solve_stokes(assemble_stokes(lo_space, {}, assembly), solver, whole);
  return out;
}

AveragedApproximation::AveragedApproximation(ZeroOrder z, const FirstOrderSolution* first, double eps)
    : z_(std::move(z)), first_(eps == 0.0 ? nullptr : first), eps_(eps) {
  if (first_) {
    upper_loc_ = std::make_shared<const PointLocator>(first_->upper.space->mesh());
    lower_loc_ = std::make_shared<const PointLocator>(first_->lower.space->mesh());
  }
}

const StokesSolution* AveragedApproximation::part(Subdomain side) const {
  if (!first_) return nullptr;
  return side == Subdomain::Upper ? &first_->upper : &first_->lower;
}

Location AveragedApproximation::locate(Subdomain side, Point x) const {
  const auto& loc = side == Subdomain::Upper ? upper_loc_ : lower_loc_;
  const auto l = loc->locate(x, 1e-8);
  if (!l)
    throw NumericalError("PointLocationFailure",
                         "point (" + std::to_string(x.x) + ", " + std::to_string(x.y) + ") outside the macro domain");
  return *l;
}

Vec2 AveragedApproximation::velocity(Point x) const {
  const Subdomain side = x.y >= 0.0 ? Subdomain::Upper : Subdomain::Lower;
  Vec2 u = z_.velocity(x);
  if (const StokesSolution* s = part(side)) {
    const Location l = locate(side, x);
    u = u + eps_ * s->velocity_at(l.tri, l.bary);
  }
  return u;
}

double AveragedApproximation::pressure(Point x) const {
  const Subdomain side = x.y >= 0.0 ? Subdomain::Upper : Subdomain::Lower;
  double p = side == Subdomain::Upper ? z_.pressure_upper(x.x) : z_.p_minus;
  if (const StokesSolution* s = part(side)) {
    const Location l = locate(side, x);
    p += eps_ * s->pressure_at(l.tri, l.bary);
  }
  return p;
}

Vec2 AveragedApproximation::velocity_on_interface(double x1, Subdomain side) const {
  Vec2 u{0.0, 0.0};
  if (const StokesSolution* s = part(side)) {
    const Location l = locate(side, {x1, 0.0});
    u = eps_ * s->velocity_at(l.tri, l.bary);
  }
  return u;
}

double AveragedApproximation::pressure_on_interface(double x1, Subdomain side) const {
  double p = side == Subdomain::Upper ? z_.pressure_upper(x1) : z_.p_minus;
  if (const StokesSolution* s = part(side)) {
    const Location l = locate(side, {x1, 0.0});
    p += eps_ * s->pressure_at(l.tri, l.bary);
  }
  return p;
}

Vec2 AveragedApproximation::normal_derivative_on_interface(double x1, Subdomain side) const {
  Vec2 d{side == Subdomain::Upper ? z_.shear() : 0.0, 0.0};
  if (const StokesSolution* s = part(side)) {
    const Location l = locate(side, {x1, 0.0});
    const auto g = s->velocity_gradient(l.tri, l.bary);
    d = d + eps_ * Vec2{g[0].y, g[1].y};
  }
  return d;
}

double flowrate_formula(const ZeroOrder& z, const CellConstants& c, double eps) {
  // [p0] is affine in x1: its mean is the midpoint value.
  return eps / c.eta_jump * z.pressure_jump(0.5);
}

double flowrate_first_order(const FirstOrderSolution& f, double eps) {
  const FESpace& sp = *f.upper.space;
  return -eps * gamma0_integral(sp, f.upper.velocity, 1);
}

std::vector<InterfaceSample> interface_report(const AveragedApproximation& a, const CellConstants& c, int samples) {
  std::vector<InterfaceSample> out;
  const double eps = a.eps();
  const double slip_plus = c.beta1_plus + c.ups1_plus, slip_minus = c.beta1_minus + c.ups1_minus;
  for (int k = 0; k < samples; ++k) {
    InterfaceSample s;
    s.x1 = (k + 0.5) / samples;
    const Vec2 up = a.velocity_on_interface(s.x1, Subdomain::Upper);
    const Vec2 lo = a.velocity_on_interface(s.x1, Subdomain::Lower);
    s.u_t_plus = up.x;
    s.u_t_minus = lo.x;
    s.u_n = 0.0 - up.y;
    s.p_jump = a.pressure_on_interface(s.x1, Subdomain::Upper) - a.pressure_on_interface(s.x1, Subdomain::Lower);
    s.slip_residual = s.u_t_plus / slip_plus - s.u_t_minus / slip_minus;
    const double dn_jump = a.normal_derivative_on_interface(s.x1, Subdomain::Upper).y -
                           a.normal_derivative_on_interface(s.x1, Subdomain::Lower).y;
    // ([sigma] n, n) with n = -e2 is [d2 u2] - [p].
    s.normal_residual = s.u_n + eps / c.eta_jump * (dn_jump - s.p_jump);
    out.push_back(s);
  }
  return out;
}

void write_interface_csv(std::ostream& os, const std::vector<InterfaceSample>& samples,
                         const std::string& provenance) {
  std::istringstream in(provenance);
  for (std::string line; std::getline(in, line);) os << "# " << line << '\n';
  os << "x1,u_t_plus,u_t_minus,u_n,p_jump\n" << std::setprecision(12);
  for (const auto& s : samples)
    os << s.x1 << ',' << s.u_t_plus << ',' << s.u_t_minus << ',' << s.u_n << ',' << s.p_jump << '\n';
}

}  // namespace stentflow
