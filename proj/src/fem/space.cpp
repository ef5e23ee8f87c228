#include "fem/space.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace stentflow {

namespace bc {
BcSpec natural() { return {}; }
BcSpec wall() { return dirichlet(Vec2{0.0, 0.0}); }
BcSpec dirichlet(VectorFn value) {
  BcSpec s;
  s.kind = BcKind::FullDirichlet;
  s.value = std::move(value);
  return s;
}
BcSpec dirichlet(Vec2 value) {
  return dirichlet(VectorFn([value](Point) { return value; }));
}
BcSpec pressure(double p) {
  BcSpec s;
  s.kind = BcKind::TangentialZeroPressure;
  s.pressure = p;
  return s;
}
BcSpec normal(Vec2 value) {
  BcSpec s;
  s.kind = BcKind::NormalDirichlet;
  s.value = [value](Point) { return value; };
  return s;
}
BcSpec periodic(BoundaryTag master) {
  BcSpec s;
  s.kind = BcKind::Periodic;
  s.partner = master;
  return s;
}
}  // namespace bc

namespace {

constexpr double kAxisTol = 1e-9;

Vec2 outward_normal(Point a, Point b) {
  const Vec2 d = b - a;
  const double l = norm(d);
  return {d.y / l, -d.x / l};
}

// Component aligned with the normal of an axis-parallel edge, or -1.
int normal_component(Vec2 n) {
  if (std::abs(n.y) < kAxisTol) return 0;
  if (std::abs(n.x) < kAxisTol) return 1;
  return -1;
}

bool same_value(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)}); }

}  // namespace

FESpace::FESpace(std::shared_ptr<const Mesh> mesh, BcMap bcs) : mesh_(std::move(mesh)), bcs_(std::move(bcs)) {
  build_edges();
  resolve_constraints();
  resolve_periodic();
}

void FESpace::build_edges() {
  tri_edges_.resize(mesh_->triangles.size());
  for (std::size_t t = 0; t < mesh_->triangles.size(); ++t) {
    const auto& v = mesh_->triangles[t];
    for (int k = 0; k < 3; ++k) {
      const int a = v[k], b = v[(k + 1) % 3];
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto [it, inserted] = edge_lookup_.emplace(key, static_cast<int>(edges_.size()));
      if (inserted) edges_.push_back({key.first, key.second});
      tri_edges_[t][k] = it->second;
    }
  }
}

std::array<int, 6> FESpace::nodes(int tri) const {
  const auto& v = mesh_->triangles[tri];
  const auto& e = tri_edges_[tri];
  const int nv = n_vertices();
  return {v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]};
}

int FESpace::edge_index(int a, int b) const {
  auto it = edge_lookup_.find({std::min(a, b), std::max(a, b)});
  return it == edge_lookup_.end() ? -1 : it->second;
}

Point FESpace::node_point(int node) const {
  if (node < n_vertices()) return mesh_->vertices[node];
  const auto& e = edges_[node - n_vertices()];
  return 0.5 * (mesh_->vertices[e[0]] + mesh_->vertices[e[1]]);
}

void FESpace::resolve_constraints() {
  struct Candidate {
    double value;
    bool strong;
    bool aligned;
  };
  std::vector<std::vector<Candidate>> cand(n_velocity());
  kernel_ = true;
  std::set<BoundaryTag> periodic_masters;
  for (const auto& [tag, spec] : bcs_)
    if (spec.kind == BcKind::Periodic) periodic_masters.insert(spec.partner);

  for (const auto& e : mesh_->boundary_edges) {
    auto it = bcs_.find(e.tag);
    if (it == bcs_.end())
      throw ConfigError("UnassembledTag", "no boundary condition for tag " + std::string(to_string(e.tag)));
    const BcSpec& spec = it->second;
    const Point pa = mesh_->vertices[e.a], pb = mesh_->vertices[e.b];
    const Vec2 n = outward_normal(pa, pb);
    const int mid = n_vertices() + edge_index(e.a, e.b);
    const std::array<int, 3> edge_nodes{e.a, e.b, mid};

    switch (spec.kind) {
      case BcKind::Natural:
        if (!periodic_masters.count(e.tag)) kernel_ = false;
        break;
      case BcKind::Periodic:
        break;
      case BcKind::FullDirichlet:
        for (int node : edge_nodes) {
          const Vec2 val = spec.value(node_point(node));
          cand[vdof(0, node)].push_back({val.x, true, std::abs(n.x) > 0.5});
          cand[vdof(1, node)].push_back({val.y, true, std::abs(n.y) > 0.5});
        }
        break;
      case BcKind::NormalDirichlet: {
        const int c = normal_component(n);
        if (c < 0)
          throw ConfigError("UnsupportedBoundary",
                            "normal-component condition on a non axis-parallel edge of " + std::string(to_string(e.tag)));
        for (int node : edge_nodes) {
          const Vec2 val = spec.value(node_point(node));
          cand[vdof(c, node)].push_back({c == 0 ? val.x : val.y, true, true});
        }
        break;
      }
      case BcKind::TangentialZeroPressure: {
        kernel_ = false;
        const int c = normal_component(n);
        if (c < 0)
          throw ConfigError("UnsupportedBoundary",
                            "tangential condition on a non axis-parallel edge of " + std::string(to_string(e.tag)));
        for (int node : edge_nodes) cand[vdof(1 - c, node)].push_back({0.0, false, false});
        break;
      }
    }
  }

  vcons_.assign(n_velocity(), {});
  for (int d = 0; d < n_velocity(); ++d) {
    const auto& cs = cand[d];
    if (cs.empty()) continue;
    std::vector<double> strong, aligned;
    for (const auto& c : cs) {
      if (!c.strong) continue;
      strong.push_back(c.value);
      if (c.aligned) aligned.push_back(c.value);
    }
    auto unanimous = [](const std::vector<double>& v) {
      return !v.empty() && std::all_of(v.begin(), v.end(), [&](double x) { return same_value(x, v.front()); });
    };
    DofConstraint& out = vcons_[d];
    out.kind = DofConstraint::Kind::Fixed;
    if (strong.empty()) {
      out.value = 0.0;
    } else if (unanimous(strong)) {
      out.value = strong.front();
    } else if (unanimous(aligned)) {
      // Disagreeing Dirichlet data at a corner: the side whose normal carries this component wins.
      out.value = aligned.front();
    } else {
      const Point p = node_point(d % n_nodes());
      throw ConfigError("ConflictingConstraints", "incompatible Dirichlet data at (" + std::to_string(p.x) + ", " +
                                                      std::to_string(p.y) + ")");
    }
  }
  pcons_.assign(n_pressure(), {});
}

void FESpace::resolve_periodic() {
  for (const auto& [slave_tag, spec] : bcs_) {
    if (spec.kind != BcKind::Periodic) continue;
    const BoundaryTag master_tag = spec.partner;
    std::set<int> slave_nodes, master_nodes;
    for (const auto& e : mesh_->boundary_edges) {
      if (e.tag != slave_tag && e.tag != master_tag) continue;
      auto& dst = e.tag == slave_tag ? slave_nodes : master_nodes;
      dst.insert(e.a);
      dst.insert(e.b);
      dst.insert(n_vertices() + edge_index(e.a, e.b));
    }
    if (slave_nodes.empty()) continue;
    if (master_nodes.size() != slave_nodes.size())
      throw ConfigError("PeriodicMismatch", "periodic boundaries " + std::string(to_string(slave_tag)) + " and " +
                                                std::string(to_string(master_tag)) + " have different node counts");
    auto bbox_min = [&](const std::set<int>& s) {
      Point lo{1e300, 1e300};
      for (int k : s) {
        const Point p = node_point(k);
        lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
      }
      return lo;
    };
    const Vec2 shift = bbox_min(slave_nodes) - bbox_min(master_nodes);
    std::vector<std::pair<Point, int>> masters;
    for (int k : master_nodes) masters.push_back({node_point(k) + shift, k});
    auto less = [](const std::pair<Point, int>& a, const std::pair<Point, int>& b) {
      return a.first.y < b.first.y || (a.first.y == b.first.y && a.first.x < b.first.x);
    };
    std::sort(masters.begin(), masters.end(), less);
    constexpr double tol = 1e-10;

    for (int s : slave_nodes) {
      const Point p = node_point(s);
      auto it = std::lower_bound(masters.begin(), masters.end(), std::make_pair(Point{-1e300, p.y - tol}, 0), less);
      int m = -1;
      for (; it != masters.end() && it->first.y <= p.y + tol; ++it)
        if (distance(it->first, p) <= tol) m = it->second;
      if (m < 0)
        throw ConfigError("PeriodicMismatch", "no periodic image for node at (" + std::to_string(p.x) + ", " +
                                                  std::to_string(p.y) + ")");
      if (m == s) continue;
      for (int c = 0; c < 2; ++c) {
        DofConstraint& cs = vcons_[vdof(c, s)];
        DofConstraint& cm = vcons_[vdof(c, m)];
        using K = DofConstraint::Kind;
        if (cs.kind == K::Fixed && cm.kind == K::Fixed) {
          if (!same_value(cs.value, cm.value))
            throw ConfigError("ConflictingConstraints", "periodic pair with different Dirichlet values");
        } else if (cs.kind == K::Fixed) {
          cm = cs;
        } else if (cm.kind == K::Fixed) {
          cs = cm;
        } else {
          cs.kind = K::Slave;
          cs.master = vdof(c, m);
        }
      }
      if (s < n_vertices()) {
        pcons_[s].kind = DofConstraint::Kind::Slave;
        pcons_[s].master = m;
      }
    }
  }
  // Collapse chains so every slave points at a non-slave DOF.
  auto collapse = [](std::vector<DofConstraint>& cons) {
    for (auto& c : cons) {
      int guard = 0;
      while (c.kind == DofConstraint::Kind::Slave && cons[c.master].kind == DofConstraint::Kind::Slave) {
        c.master = cons[c.master].master;
        if (++guard > 8) throw ConfigError("ConflictingConstraints", "cyclic periodic constraints");
      }
      if (c.kind == DofConstraint::Kind::Slave && cons[c.master].kind == DofConstraint::Kind::Fixed) c = cons[c.master];
    }
  };
  collapse(vcons_);
  collapse(pcons_);
}

std::vector<double> FESpace::dirichlet_vector() const {
  std::vector<double> u(n_velocity(), 0.0);
  for (int d = 0; d < n_velocity(); ++d)
    if (vcons_[d].kind == DofConstraint::Kind::Fixed) u[d] = vcons_[d].value;
  return u;
}

}  // namespace stentflow
