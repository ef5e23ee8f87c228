#pragma once

#include <Eigen/Sparse>
#include <functional>
#include <string>
#include <memory>
#include <vector>

#include "fem/space.hpp"

namespace stentflow {

/// Compressed-row sparse matrix.
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;

struct LineSource {
  BoundaryTag tag;   // interface or boundary edges carrying this tag
  Vec2 coefficient;  // contributes  integral of coefficient . v  along the edges
};

struct StokesSources {
  /// Volume force evaluated at quadrature points; receives the triangle index so callers can
  /// evaluate piecewise fields without point location. Empty means zero.
  std::function<Vec2(int tri, Point x)> volume;
  std::vector<LineSource> lines;
};

struct AssemblyOptions {
  int threads = 1;  // element-parallel assembly; results are identical for every thread count
};

/// Saddle-point system  [A B^T; B 0] [u; p] = [f; g]  for
///   integral grad u : grad v - integral p div v = f(v),   - integral q div u = g(q).
struct StokesSystem {
  std::shared_ptr<const FESpace> space;
  SpMat A;
  SpMat B;
  Vec f;
  Vec g;
  bool pressure_kernel = false;
};

StokesSystem assemble_stokes(std::shared_ptr<const FESpace> space, const StokesSources& sources = {},
                             const AssemblyOptions& options = {});

/// P1 pressure mass matrix on the space's vertices.
SpMat pressure_mass(const FESpace& space);

/// Constrained system: unknowns are the free and master DOFs only.
///   A_r = P^T A P,  B_r = Q^T B P,  f_r = P^T (f - A u_D),  g_r = Q^T (g - B u_D)
struct ReducedSystem {
  std::shared_ptr<const FESpace> space;
  SpMat A, B;
  Vec f, g;
  SpMat P;   // velocity prolongation, n_velocity x n_reduced_velocity
  SpMat Q;   // pressure prolongation
  Vec u_fixed;
  std::vector<int> pressure_index;  // full pressure DOF -> reduced index
  bool pressure_kernel = false;

  int n_u() const { return static_cast<int>(A.rows()); }
  int n_p() const { return static_cast<int>(B.rows()); }
  Vec expand_velocity(const Vec& u_r) const { return P * u_r + u_fixed; }
  Vec expand_pressure(const Vec& p_r) const { return Q * p_r; }
  Vec restrict_pressure(const Vec& p) const;
  /// Reduced pressure mass matrix Q^T M Q.
  SpMat pressure_mass() const;
};

ReducedSystem apply_constraints(const StokesSystem& system);

/// MatrixMarket coordinate export (debugging aid). Throws NumericalError on I/O failure.
void write_matrix_market(const std::string& path, const SpMat& m);

}  // namespace stentflow
