#include "solver/stokes_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>

#include "fem/element.hpp"
#include "fem/quadrature.hpp"

namespace stentflow {

using ColMat = Eigen::SparseMatrix<double, Eigen::ColMajor>;

void SolverConfig::validate() const {
  auto bad = [](const std::string& msg) { throw ConfigError("InvalidSolverConfig", msg); };
  if (!(outer_tol > 0.0 && outer_tol < 1.0)) bad("outer tolerance must lie in (0, 1)");
  if (!(inner_tol > 0.0 && inner_tol < 1.0)) bad("inner tolerance must lie in (0, 1)");
  if (max_outer < 1 || max_inner < 1) bad("iteration caps must be >= 1");
}

std::string_view to_string(SolveMethod m) { return m == SolveMethod::UzawaCG ? "uzawa_cg" : "direct"; }
std::string_view to_string(InnerSolver s) { return s == InnerSolver::Cholesky ? "cholesky" : "ic_cg"; }
std::string_view to_string(SchurPreconditioner s) {
  return s == SchurPreconditioner::PressureMass ? "pressure_mass" : "none";
}
std::optional<SolveMethod> solve_method_from_string(std::string_view s) {
  if (s == "uzawa_cg") return SolveMethod::UzawaCG;
  if (s == "direct") return SolveMethod::Direct;
  return std::nullopt;
}
std::optional<InnerSolver> inner_solver_from_string(std::string_view s) {
  if (s == "cholesky") return InnerSolver::Cholesky;
  if (s == "ic_cg") return InnerSolver::IncompleteCholeskyCG;
  return std::nullopt;
}
std::optional<SchurPreconditioner> schur_preconditioner_from_string(std::string_view s) {
  if (s == "pressure_mass") return SchurPreconditioner::PressureMass;
  if (s == "none") return SchurPreconditioner::None;
  return std::nullopt;
}

namespace {

// Repeated solves with the velocity block.
class VelocitySolver {
 public:
  VelocitySolver(const SpMat& a, const SolverConfig& cfg) : kind_(cfg.inner), matrix_(a) {
    const ColMat& col = matrix_;  // the CG solver keeps a reference to it
    if (kind_ == InnerSolver::Cholesky) {
      llt_.compute(col);
      if (llt_.info() != Eigen::Success)
        throw NumericalError("SingularSystem", "velocity block is not positive definite");
    } else {
      cg_.setTolerance(cfg.inner_tol);
      cg_.setMaxIterations(cfg.max_inner);
      cg_.compute(col);
      if (cg_.info() != Eigen::Success)
        throw NumericalError("SingularSystem", "incomplete Cholesky factorization failed");
    }
  }

  Vec solve(const Vec& b) {
    if (b.size() == 0) return b;
    if (kind_ == InnerSolver::Cholesky) {
      ++iterations_;
      return llt_.solve(b);
    }
    Vec x = cg_.solve(b);
    iterations_ += cg_.iterations();
    if (cg_.info() != Eigen::Success) inner_failed_ = true;
    return x;
  }

  long iterations() const { return iterations_; }
  bool inner_failed() const { return inner_failed_; }

 private:
  InnerSolver kind_;
  ColMat matrix_;
  Eigen::SimplicialLLT<ColMat> llt_;
  Eigen::ConjugateGradient<ColMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg_;
  long iterations_ = 0;
  bool inner_failed_ = false;
};

double safe_norm(double n) { return n > 0.0 ? n : 1.0; }

void residuals(const ReducedSystem& s, const Vec& u, const Vec& p, SolverDiagnostics& d) {
  d.momentum_residual = (s.A * u + s.B.transpose() * p - s.f).norm() / safe_norm(s.f.norm());
  d.divergence_residual = (s.B * u - s.g).norm() / std::max(s.g.norm(), 1.0);
}

void remove_mean(Vec& v) {
  if (v.size() > 0) v.array() -= v.mean();
}

struct Iterate {
  Vec u, p;
};

Iterate uzawa(const ReducedSystem& s, const SolverConfig& cfg, SolverDiagnostics& diag) {
  VelocitySolver inner(s.A, cfg);
  const int np = s.n_p();
  const bool kernel = s.pressure_kernel;

  std::optional<Eigen::SimplicialLLT<ColMat>> mass;
  if (cfg.schur_preconditioner == SchurPreconditioner::PressureMass) {
    mass.emplace(ColMat(s.pressure_mass()));
    if (mass->info() != Eigen::Success) throw NumericalError("SingularSystem", "pressure mass matrix");
  }
  auto precondition = [&](const Vec& r) {
    Vec z = mass ? Vec(mass->solve(r)) : r;
    if (kernel) remove_mean(z);
    return z;
  };
  auto schur = [&](const Vec& d) -> Vec { return s.B * inner.solve(s.B.transpose() * d); };

  const double gscale = std::max(s.g.norm(), 1.0);
  Vec p = Vec::Zero(np);
  Vec u = inner.solve(s.f);
  int it = 0;
  bool converged = false;
  // Restarted PCG on S p = B A^-1 f - g; each cycle starts from the true residual B u - g.
  while (it < cfg.max_outer && !converged) {
    Vec r = s.B * u - s.g;
    if (kernel) remove_mean(r);
    Vec z = precondition(r);
    double rz = r.dot(z);
    auto small = [&](const Vec& res, double res_z) {
      return res.norm() / gscale <= cfg.outer_tol && std::sqrt(std::max(res_z, 0.0)) <= cfg.outer_tol;
    };
    if (small(r, rz)) {
      converged = true;
      break;
    }
    Vec d = z;
    // The recurrence drifts from the true residual once it is far below the inner accuracy.
    for (; it < cfg.max_outer; ++it) {
      const Vec sd = schur(d);
      const double curv = d.dot(sd);
      if (!(curv > 0.0)) {
        if (d.norm() == 0.0) break;
        throw NumericalError("SingularSystem", "non-positive curvature in the Schur complement iteration");
      }
      const double alpha = rz / curv;
      p += alpha * d;
      r -= alpha * sd;
      if (kernel) remove_mean(r);
      z = precondition(r);
      const double rz_new = r.dot(z);
      // Pointwise pressure accuracy: the last increment must also be well below the tolerance.
      const double step = std::abs(alpha) * d.lpNorm<Eigen::Infinity>();
      if (small(r, rz_new) && step <= 0.1 * cfg.outer_tol * std::max(1.0, p.lpNorm<Eigen::Infinity>())) {
        ++it;
        break;
      }
      d = z + (rz_new / rz) * d;
      rz = rz_new;
    }
    u = inner.solve(s.f - s.B.transpose() * p);
    Vec true_r = s.B * u - s.g;
    if (kernel) remove_mean(true_r);
    converged = small(true_r, true_r.dot(precondition(true_r)));
    if (!converged && it >= cfg.max_outer) break;
  }
  diag.outer_iterations = it;
  diag.inner_iterations = inner.iterations();
  diag.converged = converged && !inner.inner_failed();
  return {u, p};
}

Iterate direct(const ReducedSystem& s, SolverDiagnostics& diag) {
  const int nu = s.n_u(), np = s.n_p();
  const int pinned = s.pressure_kernel && np > 0 ? 0 : -1;
  const int nk = nu + np - (pinned >= 0 ? 1 : 0);
  auto prow = [&](int q) { return nu + (pinned >= 0 && q > pinned ? q - 1 : q); };
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < nu; ++r)
    for (SpMat::InnerIterator it(s.A, r); it; ++it) trip.emplace_back(r, it.col(), it.value());
  for (int q = 0; q < np; ++q) {
    if (q == pinned) continue;
    for (SpMat::InnerIterator it(s.B, q); it; ++it) {
      trip.emplace_back(prow(q), it.col(), it.value());
      trip.emplace_back(it.col(), prow(q), it.value());
    }
  }
  ColMat k(nk, nk);
  k.setFromTriplets(trip.begin(), trip.end());
  Vec rhs(nk);
  rhs.head(nu) = s.f;
  for (int q = 0; q < np; ++q)
    if (q != pinned) rhs[prow(q)] = s.g[q];
  Eigen::SparseLU<ColMat, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(k);
  if (lu.info() != Eigen::Success) throw NumericalError("SingularSystem", "sparse LU factorization failed");
  const Vec x = lu.solve(rhs);
  Iterate out{x.head(nu), Vec::Zero(np)};
  for (int q = 0; q < np; ++q)
    if (q != pinned) out.p[q] = x[prow(q)];
  diag.outer_iterations = 1;
  diag.inner_iterations = 0;
  diag.converged = true;
  return out;
}

}  // namespace

StokesSolution solve_stokes(const ReducedSystem& s, const SolverConfig& cfg,
                            const std::optional<RegionFn>& normalization) {
  cfg.validate();
  if (s.pressure_kernel && !normalization)
    throw NumericalError("MissingNormalization", "pressure is defined up to a constant; a normalization region is required");
  SolverDiagnostics diag;
  diag.method = std::string(to_string(cfg.method));
  Iterate it = cfg.method == SolveMethod::Direct ? direct(s, diag) : uzawa(s, cfg, diag);
  if (s.pressure_kernel) {
    // Residuals are measured after fixing the additive constant, which does not change them.
    remove_mean(it.p);
  }
  residuals(s, it.u, it.p, diag);
  if (cfg.method == SolveMethod::Direct)
    diag.converged = diag.momentum_residual <= cfg.outer_tol && diag.divergence_residual <= cfg.outer_tol;

  StokesSolution sol;
  sol.space = s.space;
  sol.velocity = s.expand_velocity(it.u);
  sol.pressure = s.expand_pressure(it.p);
  if (s.pressure_kernel) {
    const auto [integral, area] = integrate_p1(s.space->mesh(), sol.pressure, *normalization);
    if (!(area > 0.0)) throw NumericalError("MissingNormalization", "normalization region is empty");
    sol.pressure.array() -= integral / area;
  }
  sol.diagnostics = diag;
  if (cfg.log)
    std::fprintf(stderr, "stokes: method=%s inner=%s outer_iterations=%d inner_iterations=%ld momentum=%.3e "
                         "divergence=%.3e%s\n",
                 diag.method.c_str(), std::string(to_string(cfg.inner)).c_str(), diag.outer_iterations,
                 diag.inner_iterations, diag.momentum_residual, diag.divergence_residual,
                 diag.converged ? "" : " NOT CONVERGED");
  return sol;
}

StokesSolution solve_stokes(const StokesSystem& system, const SolverConfig& config,
                            const std::optional<RegionFn>& normalization) {
  return solve_stokes(apply_constraints(system), config, normalization);
}

PoissonResult solve_poisson(std::shared_ptr<const Mesh> mesh, const TriScalarField& rhs,
                            const std::set<BoundaryTag>& dirichlet_tags, int degree, double tol) {
  if (degree != 1 && degree != 2) throw ConfigError("InvalidArgument", "Poisson degree must be 1 or 2");
  BcMap bcs;
  for (const auto& e : mesh->boundary_edges)
    bcs[e.tag] = (dirichlet_tags.empty() || dirichlet_tags.count(e.tag)) ? bc::wall() : bc::natural();
  const FESpace space(mesh, bcs);
  const int n = degree == 1 ? space.n_vertices() : space.n_nodes();
  const int nloc = degree == 1 ? 3 : 6;

  std::vector<Eigen::Triplet<double>> trip;
  Vec load = Vec::Zero(n);
  for (int t = 0; t < static_cast<int>(mesh->triangles.size()); ++t) {
    const Element el(*mesh, t);
    const auto nodes = space.nodes(t);
    double k[6][6] = {};
    for (const auto& q : triangle_rule()) {
      const double w = q.weight * el.area;
      const double f = rhs(t, q.bary, el.map(q.bary));
      if (degree == 1) {
        for (int i = 0; i < 3; ++i) {
          load[nodes[i]] += w * f * q.bary[i];
          for (int j = 0; j < 3; ++j) k[i][j] += w * dot(el.grad_lambda[i], el.grad_lambda[j]);
        }
      } else {
        const auto phi = Element::p2_values(q.bary);
        const auto g = el.p2_grads(q.bary);
        for (int i = 0; i < 6; ++i) {
          load[nodes[i]] += w * f * phi[i];
          for (int j = 0; j < 6; ++j) k[i][j] += w * dot(g[i], g[j]);
        }
      }
    }
    for (int i = 0; i < nloc; ++i)
      for (int j = 0; j < nloc; ++j) trip.emplace_back(nodes[i], nodes[j], k[i][j]);
  }
  ColMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());

  const auto& cons = space.velocity_constraints();
  std::vector<int> index(n, -1);
  int nfree = 0;
  for (int i = 0; i < n; ++i)
    if (cons[space.vdof(0, i)].kind != DofConstraint::Kind::Fixed) index[i] = nfree++;
  std::vector<Eigen::Triplet<double>> ptrip;
  for (int i = 0; i < n; ++i)
    if (index[i] >= 0) ptrip.emplace_back(i, index[i], 1.0);
  ColMat P(n, nfree);
  P.setFromTriplets(ptrip.begin(), ptrip.end());
  const ColMat Kr = P.transpose() * K * P;
  const Vec br = P.transpose() * load;

  PoissonResult out;
  out.degree = degree;
  Vec x = Vec::Zero(nfree);
  if (nfree > 0 && br.norm() > 0.0) {
    Eigen::ConjugateGradient<ColMat, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    cg.setTolerance(tol);
    cg.setMaxIterations(std::max(1000, 10 * static_cast<int>(std::sqrt(static_cast<double>(nfree))) * 10));
    cg.compute(Kr);
    if (cg.info() != Eigen::Success) throw NumericalError("NonConvergence", "Poisson preconditioner failed");
    x = cg.solve(br);
    out.iterations = static_cast<int>(cg.iterations());
    if (cg.info() != Eigen::Success)
      throw NumericalError("NonConvergence", "Poisson CG did not reach the tolerance");
  }
  out.coefficients = P * x;
  out.gradient_norm = std::sqrt(std::max(0.0, out.coefficients.dot(K * out.coefficients)));
  return out;
}

}  // namespace stentflow
