#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "geometry/mesh.hpp"

namespace stentflow {

using VectorFn = std::function<Vec2(Point)>;
using ScalarFn = std::function<double(Point)>;

enum class BcKind {
  Natural,                 // traction-free in the gradient form: du/dn - p n = 0
  FullDirichlet,           // u = value
  TangentialZeroPressure,  // u.t = 0 and natural datum p = pressure
  NormalDirichlet,         // u.n-aligned component = value.component, other component natural
  Periodic,                // slave of `partner`
};

struct BcSpec {
  BcKind kind = BcKind::Natural;
  VectorFn value;          // FullDirichlet / NormalDirichlet
  double pressure = 0.0;   // TangentialZeroPressure
  BoundaryTag partner = BoundaryTag::StripLeft;  // Periodic
};

namespace bc {
BcSpec natural();
BcSpec wall();
BcSpec dirichlet(VectorFn value);
BcSpec dirichlet(Vec2 value);
BcSpec pressure(double p);
BcSpec normal(Vec2 value);
BcSpec periodic(BoundaryTag master);
}  // namespace bc

using BcMap = std::map<BoundaryTag, BcSpec>;

/// Status of one degree of freedom after constraint resolution.
struct DofConstraint {
  enum class Kind : std::uint8_t { Free, Fixed, Slave } kind = Kind::Free;
  double value = 0.0;  // Fixed
  int master = -1;     // Slave: full index of the master DOF
};

/// Taylor-Hood P2/P1 space on a triangle mesh.
///
/// Nodes are the mesh vertices followed by the edge midpoints. Velocity DOF of component
/// c at node k is c * n_nodes() + k; pressure DOFs are the vertices.
class FESpace {
 public:
  /// Resolves boundary conditions. Every boundary tag present in the mesh must be in `bcs`
  /// (ConfigError "UnassembledTag" otherwise). Throws ConfigError("ConflictingConstraints")
  /// when corner constraints cannot be reconciled.
  FESpace(std::shared_ptr<const Mesh> mesh, BcMap bcs);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  const BcMap& bcs() const { return bcs_; }

  int n_vertices() const { return static_cast<int>(mesh_->vertices.size()); }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  int n_nodes() const { return n_vertices() + n_edges(); }
  int n_velocity() const { return 2 * n_nodes(); }
  int n_pressure() const { return n_vertices(); }

  /// Local P2 nodes of triangle t: 3 vertices then the midpoints of (v0,v1), (v1,v2), (v2,v0).
  std::array<int, 6> nodes(int tri) const;
  int edge_index(int a, int b) const;  // -1 if (a,b) is not a mesh edge
  const std::array<int, 2>& edge(int e) const { return edges_[e]; }
  Point node_point(int node) const;

  int vdof(int component, int node) const { return component * n_nodes() + node; }

  const std::vector<DofConstraint>& velocity_constraints() const { return vcons_; }
  const std::vector<DofConstraint>& pressure_constraints() const { return pcons_; }

  /// True if no boundary lets velocity leave the domain, so pressure is defined up to a constant.
  bool pressure_kernel() const { return kernel_; }

  /// Values of the fixed velocity DOFs, zero elsewhere.
  std::vector<double> dirichlet_vector() const;

 private:
  void build_edges();
  void resolve_constraints();
  void resolve_periodic();

  std::shared_ptr<const Mesh> mesh_;
  BcMap bcs_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::map<std::pair<int, int>, int> edge_lookup_;
  std::vector<DofConstraint> vcons_;
  std::vector<DofConstraint> pcons_;
  bool kernel_ = false;
};

}  // namespace stentflow
