#include "fem/assembly.hpp"

#include <thread>
#include <unsupported/Eigen/SparseExtra>

#include "fem/element.hpp"
#include "fem/quadrature.hpp"

namespace stentflow {
namespace {

using Triplet = Eigen::Triplet<double>;

struct Chunk {
  std::vector<Triplet> a, b;
  std::vector<std::pair<int, double>> f;
};

void assemble_range(const FESpace& space, const StokesSources& sources, int first, int last, Chunk& out) {
  const Mesh& mesh = space.mesh();
  const auto& rule = triangle_rule();
  for (int t = first; t < last; ++t) {
    const Element el(mesh, t);
    const auto nodes = space.nodes(t);
    double a_loc[6][6] = {};
    double b_loc[3][2][6] = {};
    double f_loc[2][6] = {};
    for (const auto& q : rule) {
      const double w = q.weight * el.area;
      const auto phi = Element::p2_values(q.bary);
      const auto grad = el.p2_grads(q.bary);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) a_loc[i][j] += w * dot(grad[i], grad[j]);
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 6; ++j) {
          b_loc[k][0][j] -= w * q.bary[k] * grad[j].x;
          b_loc[k][1][j] -= w * q.bary[k] * grad[j].y;
        }
      if (sources.volume) {
        const Vec2 force = sources.volume(t, el.map(q.bary));
        for (int i = 0; i < 6; ++i) {
          f_loc[0][i] += w * phi[i] * force.x;
          f_loc[1][i] += w * phi[i] * force.y;
        }
      }
    }
    const auto& tv = mesh.triangles[t];
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < 6; ++i) {
        const int row = space.vdof(c, nodes[i]);
        for (int j = 0; j < 6; ++j) out.a.emplace_back(row, space.vdof(c, nodes[j]), a_loc[i][j]);
        if (sources.volume) out.f.emplace_back(row, f_loc[c][i]);
      }
      for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 6; ++j) out.b.emplace_back(tv[k], space.vdof(c, nodes[j]), b_loc[k][c][j]);
    }
  }
}

// Integrates coefficient . v over edge (a, b) for the three P2 trace functions.
void add_edge_load(const FESpace& space, int a, int b, Vec2 coefficient, Vec& f) {
  const Mesh& mesh = space.mesh();
  const double len = distance(mesh.vertices[a], mesh.vertices[b]);
  const int mid = space.n_vertices() + space.edge_index(a, b);
  for (const auto& q : line_rule()) {
    const double t = q.t;
    const double phi[3] = {(1 - t) * (1 - 2 * t), t * (2 * t - 1), 4 * t * (1 - t)};
    const int nodes[3] = {a, b, mid};
    for (int k = 0; k < 3; ++k) {
      f[space.vdof(0, nodes[k])] += len * q.weight * phi[k] * coefficient.x;
      f[space.vdof(1, nodes[k])] += len * q.weight * phi[k] * coefficient.y;
    }
  }
}

}  // namespace

StokesSystem assemble_stokes(std::shared_ptr<const FESpace> space_ptr, const StokesSources& sources,
                             const AssemblyOptions& options) {
  const FESpace& space = *space_ptr;
  const Mesh& mesh = space.mesh();
  const int nt = static_cast<int>(mesh.triangles.size());
  const int threads = std::max(1, std::min(options.threads, nt / 256 + 1));

  std::vector<Chunk> chunks(threads);
  if (threads == 1) {
    assemble_range(space, sources, 0, nt, chunks[0]);
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < threads; ++k) {
      const int first = static_cast<int>(static_cast<long long>(nt) * k / threads);
      const int last = static_cast<int>(static_cast<long long>(nt) * (k + 1) / threads);
      pool.emplace_back([&, first, last, k] { assemble_range(space, sources, first, last, chunks[k]); });
    }
    for (auto& th : pool) th.join();
  }

  StokesSystem sys;
  sys.space = space_ptr;
  sys.pressure_kernel = space.pressure_kernel();
  std::vector<Triplet> ta, tb;
  sys.f = Vec::Zero(space.n_velocity());
  for (auto& c : chunks) {
    ta.insert(ta.end(), c.a.begin(), c.a.end());
    tb.insert(tb.end(), c.b.begin(), c.b.end());
    for (auto [i, v] : c.f) sys.f[i] += v;
  }
  sys.A.resize(space.n_velocity(), space.n_velocity());
  sys.A.setFromTriplets(ta.begin(), ta.end());
  sys.B.resize(space.n_pressure(), space.n_velocity());
  sys.B.setFromTriplets(tb.begin(), tb.end());
  sys.g = Vec::Zero(space.n_pressure());

  for (const auto& e : mesh.boundary_edges) {
    const BcSpec& spec = space.bcs().at(e.tag);
    if (spec.kind != BcKind::TangentialZeroPressure || spec.pressure == 0.0) continue;
    const Vec2 d = mesh.vertices[e.b] - mesh.vertices[e.a];
    const Vec2 n{d.y / norm(d), -d.x / norm(d)};
    add_edge_load(space, e.a, e.b, -spec.pressure * n, sys.f);
  }
  for (const auto& src : sources.lines) {
    for (const auto* list : {&mesh.boundary_edges, &mesh.interface_edges})
      for (const auto& e : *list)
        if (e.tag == src.tag) add_edge_load(space, e.a, e.b, src.coefficient, sys.f);
  }
  return sys;
}

SpMat pressure_mass(const FESpace& space) {
  const Mesh& mesh = space.mesh();
  std::vector<Triplet> trip;
  trip.reserve(9 * mesh.triangles.size());
  for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
    const double area = mesh.signed_area(t);
    const auto& v = mesh.triangles[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(v[i], v[j], area * (i == j ? 2.0 : 1.0) / 12.0);
  }
  SpMat m(space.n_pressure(), space.n_pressure());
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

namespace {

SpMat prolongation(const std::vector<DofConstraint>& cons, std::vector<int>& index) {
  const int n = static_cast<int>(cons.size());
  index.assign(n, -1);
  int next = 0;
  for (int d = 0; d < n; ++d)
    if (cons[d].kind == DofConstraint::Kind::Free) index[d] = next++;
  std::vector<Triplet> trip;
  for (int d = 0; d < n; ++d) {
    if (cons[d].kind == DofConstraint::Kind::Slave) index[d] = index[cons[d].master];
    if (index[d] >= 0) trip.emplace_back(d, index[d], 1.0);
  }
  SpMat p(n, next);
  p.setFromTriplets(trip.begin(), trip.end());
  return p;
}

}  // namespace

ReducedSystem apply_constraints(const StokesSystem& sys) {
  const FESpace& space = *sys.space;
  ReducedSystem r;
  r.space = sys.space;
  r.pressure_kernel = sys.pressure_kernel;
  std::vector<int> vindex;
  r.P = prolongation(space.velocity_constraints(), vindex);
  r.Q = prolongation(space.pressure_constraints(), r.pressure_index);
  const auto ud = space.dirichlet_vector();
  r.u_fixed = Eigen::Map<const Vec>(ud.data(), static_cast<Eigen::Index>(ud.size()));
  const SpMat Pt = r.P.transpose();
  const SpMat Qt = r.Q.transpose();
  r.A = Pt * sys.A * r.P;
  r.B = Qt * sys.B * r.P;
  r.f = Pt * (sys.f - sys.A * r.u_fixed);
  r.g = Qt * (sys.g - sys.B * r.u_fixed);
  r.A.prune(0.0);
  r.B.prune(0.0);
  return r;
}

Vec ReducedSystem::restrict_pressure(const Vec& p) const {
  Vec out = Vec::Zero(Q.cols());
  for (int d = 0; d < static_cast<int>(pressure_index.size()); ++d)
    if (pressure_index[d] >= 0) out[pressure_index[d]] = p[d];
  return out;
}

SpMat ReducedSystem::pressure_mass() const {
  const SpMat m = stentflow::pressure_mass(*space);
  return SpMat(Q.transpose() * m * Q);
}

void write_matrix_market(const std::string& path, const SpMat& m) {
  if (!Eigen::saveMarket(m, path)) throw NumericalError("IoError", "cannot write " + path);
}

}  // namespace stentflow
