#pragma once

#include <memory>
#include <string>

#include "fem/assembly.hpp"

namespace stentflow {

struct SolverDiagnostics {
  std::string method;
  int outer_iterations = 0;
  long inner_iterations = 0;
  double momentum_residual = 0.0;    // |A u + B^T p - f| / |f| on the constrained system
  double divergence_residual = 0.0;  // |B u - g| / max(|g|, 1)
  bool converged = true;
};

/// Full-length coefficient vectors (constrained DOFs carry their imposed values).
struct StokesSolution {
  std::shared_ptr<const FESpace> space;
  Vec velocity;
  Vec pressure;
  SolverDiagnostics diagnostics;

  Vec2 velocity_at(int tri, const std::array<double, 3>& bary) const;
  /// Rows: components; columns: d/dx1, d/dx2.
  std::array<Vec2, 2> velocity_gradient(int tri, const std::array<double, 3>& bary) const;
  double pressure_at(int tri, const std::array<double, 3>& bary) const;
  /// Nodal velocity at the mesh vertices, interleaved (u1, u2) per vertex.
  std::vector<double> vertex_velocity() const;
};

}  // namespace stentflow
