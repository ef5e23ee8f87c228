#pragma once

#include <optional>
#include <set>
#include <string>

#include "fem/fields.hpp"
#include "fem/solution.hpp"

namespace stentflow {

enum class SolveMethod { UzawaCG, Direct };
enum class InnerSolver { IncompleteCholeskyCG, Cholesky };
enum class SchurPreconditioner { PressureMass, None };

struct SolverConfig {
  SolveMethod method = SolveMethod::UzawaCG;
  InnerSolver inner = InnerSolver::Cholesky;
  SchurPreconditioner schur_preconditioner = SchurPreconditioner::PressureMass;
  double outer_tol = 1e-10;
  double inner_tol = 1e-12;
  int max_outer = 2000;
  int max_inner = 20000;
  bool log = true;  // one diagnostics line per solve on stderr

  /// Throws ConfigError("InvalidSolverConfig").
  void validate() const;
};

std::string_view to_string(SolveMethod m);
std::string_view to_string(InnerSolver s);
std::string_view to_string(SchurPreconditioner s);
std::optional<SolveMethod> solve_method_from_string(std::string_view s);
std::optional<InnerSolver> inner_solver_from_string(std::string_view s);
std::optional<SchurPreconditioner> schur_preconditioner_from_string(std::string_view s);

/// Solves a constrained Stokes system. When the pressure is only defined up to a constant,
/// `normalization` selects the triangles (by centroid) over which the mean pressure is set
/// to zero; it is required in that case (NumericalError "MissingNormalization").
///
/// Non-convergence is reported through diagnostics.converged = false with the best iterate.
/// Throws NumericalError("SingularSystem") if the Schur complement CG meets a non-positive
/// curvature or a factorization fails.
StokesSolution solve_stokes(const ReducedSystem& system, const SolverConfig& config,
                            const std::optional<RegionFn>& normalization = std::nullopt);

/// Convenience: assemble-reduced system straight from the full one.
StokesSolution solve_stokes(const StokesSystem& system, const SolverConfig& config,
                            const std::optional<RegionFn>& normalization = std::nullopt);

struct PoissonResult {
  Vec coefficients;        // nodal values (vertices for degree 1, vertices then edges for degree 2)
  double gradient_norm = 0.0;  // |grad q|_{L2}
  int iterations = 0;
  int degree = 1;
};

/// Galerkin solution of -Laplace q = rhs with q = 0 on the listed boundary tags (all boundary
/// tags when `dirichlet_tags` is empty) and natural conditions elsewhere. Uses incomplete
/// Cholesky preconditioned CG; throws NumericalError("NonConvergence") if it stalls.
PoissonResult solve_poisson(std::shared_ptr<const Mesh> mesh, const TriScalarField& rhs,
                            const std::set<BoundaryTag>& dirichlet_tags = {}, int degree = 1, double tol = 1e-12);

}  // namespace stentflow
