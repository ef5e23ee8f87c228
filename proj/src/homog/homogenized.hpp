#pragma once

#include <iosfwd>
#include <memory>
#include <vector>

#include "cells/cell_problems.hpp"

namespace stentflow {

/// Prescribed pressures; p_out2 is ignored in the aneurysm case.
struct FlowData {
  FlowCase flow_case = FlowCase::Collateral;
  double p_in = 2.0;
  double p_out1 = 0.0;
  double p_out2 = -1.0;

  /// Throws ConfigError("InvalidFlowData") for non-finite values.
  void validate() const;
};

/// Poiseuille flow in Omega_1, rest state in Omega_2.
struct ZeroOrder {
  FlowData flow;
  double p_minus = 0.0;  // constant pressure in Omega_2

  /// d u_{0,1} / d x2 at x2 = 0+.
  double shear() const { return 0.5 * (flow.p_in - flow.p_out1); }
  Vec2 velocity(Point x) const;
  /// Upper formula for x2 >= 0.
  double pressure(Point x) const;
  double pressure_upper(double x1) const { return flow.p_in * (1.0 - x1) + flow.p_out1 * x1; }
  /// [p0](x1) = p0(x1, 0+) - p0(x1, 0-).
  double pressure_jump(double x1) const { return pressure_upper(x1) - p_minus; }
};

/// Collateral: p_minus = p_out2. Aneurysm: p_minus is the mean of the upper pressure over Gamma0.
ZeroOrder zero_order(const FlowData& flow);

/// Dirichlet trace of u1 on Gamma0 from above (Upper) or below (Lower):
///   (shear (beta1 + ups1), -[p0](x1) / [eta]).
Vec2 interface_dirichlet(const ZeroOrder& z, const CellConstants& c, Subdomain side, double x1);

struct FirstOrderSolution {
  StokesSolution upper;  // on Omega_1
  StokesSolution lower;  // on Omega_2
  double interface_flux = 0.0;  // integral over Gamma0 of the lower trace . e2 (discrete, Simpson on edges)
};

/// Two independent Stokes solves with the interface data as Dirichlet condition on Gamma0,
/// walls at rest and u.t = 0, p = 0 on the pressure sides. In the aneurysm case Omega_2 is
/// closed: its pressure is normalized to zero mean and NumericalError("CompatibilityFailure")
/// is thrown if the net interface flux exceeds 1e-10.
FirstOrderSolution solve_first_order(std::shared_ptr<const Mesh> upper, std::shared_ptr<const Mesh> lower,
                                     const ZeroOrder& z, const CellConstants& c, const SolverConfig& solver,
                                     const AssemblyOptions& assembly = {});

/// u0 + eps u1 and p0 + eps p1 evaluated by point location on the subdomain meshes.
/// With no first-order solution (or eps = 0) this is the zero-order solution.
class AveragedApproximation {
 public:
  AveragedApproximation(ZeroOrder z, const FirstOrderSolution* first, double eps);

  Vec2 velocity(Point x) const;
  double pressure(Point x) const;
  /// One-sided values on Gamma0 (x2 = 0).
  Vec2 velocity_on_interface(double x1, Subdomain side) const;
  double pressure_on_interface(double x1, Subdomain side) const;
  /// One-sided d(u bar)/dx2 on Gamma0.
  Vec2 normal_derivative_on_interface(double x1, Subdomain side) const;

  double eps() const { return eps_; }
  const ZeroOrder& zero() const { return z_; }

 private:
  const StokesSolution* part(Subdomain side) const;
  Location locate(Subdomain side, Point x) const;

  ZeroOrder z_;
  const FirstOrderSolution* first_;
  double eps_;
  std::shared_ptr<const PointLocator> upper_loc_, lower_loc_;
};

/// Q = (eps / [eta]) * integral over Gamma0 of [p0].
double flowrate_formula(const ZeroOrder& z, const CellConstants& c, double eps);
/// eps * integral over Gamma0 of u1 . n (n = -e2) from the discrete first-order trace.
double flowrate_first_order(const FirstOrderSolution& f, double eps);

struct InterfaceSample {
  double x1 = 0.0;
  double u_t_plus = 0.0, u_t_minus = 0.0;  // tangential averaged velocity on both sides
  double u_n = 0.0;                        // u bar . n, n = -e2
  double p_jump = 0.0;                     // [p bar]
  double slip_residual = 0.0;   // u_t_plus / (beta1+ + ups1+) - u_t_minus / (beta1- + ups1-)
  double normal_residual = 0.0; // u_n + (eps / [eta]) ([sigma] n, n)
};

/// Diagnostics of the implicit interface relations along Gamma0 (nothing is solved).
std::vector<InterfaceSample> interface_report(const AveragedApproximation& a, const CellConstants& c, int samples);

/// CSV with columns x1,u_t_plus,u_t_minus,u_n,p_jump.
void write_interface_csv(std::ostream& os, const std::vector<InterfaceSample>& samples,
                         const std::string& provenance = {});

}  // namespace stentflow
