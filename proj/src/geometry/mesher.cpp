#include "geometry/mesher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "geometry/predicates.hpp"

namespace stentflow {
namespace {

using predicates::incircle;
using predicates::orient2d;

constexpr int kNone = -1;

std::uint64_t directed_key(int u, int v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) |
         static_cast<std::uint32_t>(v);
}

std::uint64_t undirected_key(int u, int v) { return u < v ? directed_key(u, v) : directed_key(v, u); }

class Refiner {
 public:
  Refiner(const Pslg& pslg, const SizeField& size, const MesherOptions& opts)
      : size_(size), opts_(opts) {
    build_super_triangle(pslg.points);
    presplit_and_insert(pslg);
    recover_segments();
    carve(pslg.holes);
    refine();
  }

  Mesh extract() const;

 private:
  struct Tri {
    std::array<int, 3> v;
    bool alive = true;
  };
  struct Seg {
    int a, b;
    BoundaryTag tag;
    int partner;
    bool alive = true;
  };
  struct Edge {
    int u, v;
  };
  struct Located {
    int tri = kNone;
    int blocked_seg = kNone;
    int existing_vertex = kNone;
  };

  const SizeField& size_;
  MesherOptions opts_;
  std::vector<Point> pts_;
  std::vector<Tri> tris_;
  std::unordered_map<std::uint64_t, int> edge_tri_;
  std::vector<Seg> segs_;
  std::unordered_map<std::uint64_t, int> seg_of_edge_;
  bool constrained_ = false;
  int last_tri_ = 0;
  std::vector<unsigned> stamp_;
  unsigned generation_ = 0;
  unsigned walk_counter_ = 0;

  // -- triangle bookkeeping --------------------------------------------------------------
  int add_triangle(int a, int b, int c) {
    const int id = static_cast<int>(tris_.size());
    tris_.push_back({{a, b, c}, true});
    stamp_.push_back(0);
    edge_tri_[directed_key(a, b)] = id;
    edge_tri_[directed_key(b, c)] = id;
    edge_tri_[directed_key(c, a)] = id;
    last_tri_ = id;
    return id;
  }

  void kill_triangle(int t) {
    auto& tri = tris_[t];
    for (int k = 0; k < 3; ++k) {
      auto it = edge_tri_.find(directed_key(tri.v[k], tri.v[(k + 1) % 3]));
      if (it != edge_tri_.end() && it->second == t) edge_tri_.erase(it);
    }
    tri.alive = false;
  }

  int tri_of_edge(int u, int v) const {
    auto it = edge_tri_.find(directed_key(u, v));
    return it == edge_tri_.end() ? kNone : it->second;
  }

  int seg_at(int u, int v) const {
    if (!constrained_) return kNone;
    auto it = seg_of_edge_.find(undirected_key(u, v));
    return it == seg_of_edge_.end() ? kNone : it->second;
  }

  bool edge_exists(int u, int v) const { return tri_of_edge(u, v) != kNone || tri_of_edge(v, u) != kNone; }

  // -- setup -----------------------------------------------------------------------------
  void build_super_triangle(const std::vector<Point>& points) {
    double xmin = std::numeric_limits<double>::max(), ymin = xmin;
    double xmax = std::numeric_limits<double>::lowest(), ymax = xmax;
    for (const auto& p : points) {
      xmin = std::min(xmin, p.x);
      xmax = std::max(xmax, p.x);
      ymin = std::min(ymin, p.y);
      ymax = std::max(ymax, p.y);
    }
    const double span = std::max({xmax - xmin, ymax - ymin, 1.0});
    const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
    pts_.push_back({cx - 20.0 * span, cy - 10.0 * span});
    pts_.push_back({cx + 20.0 * span, cy - 10.0 * span});
    pts_.push_back({cx, cy + 20.0 * span});
    add_triangle(0, 1, 2);
  }

  void presplit_and_insert(const Pslg& pslg) {
    std::vector<int> vid(pslg.points.size(), kNone);
    for (std::size_t i = 0; i < pslg.points.size(); ++i) vid[i] = insert_vertex(pslg.points[i]);

    // Pieces per segment from the size field; partners share the larger count.
    std::vector<int> pieces(pslg.segments.size(), 1);
    for (std::size_t s = 0; s < pslg.segments.size(); ++s) {
      const auto& seg = pslg.segments[s];
      const Point a = pslg.points[seg.a], b = pslg.points[seg.b];
      const double len = distance(a, b);
      double h = std::numeric_limits<double>::max();
      constexpr int kProbe = 16;
      for (int k = 0; k <= kProbe; ++k) {
        const double t = static_cast<double>(k) / kProbe;
        h = std::min(h, size_(a + t * (b - a)));
      }
      pieces[s] = std::max(1, static_cast<int>(std::ceil(len / h - 1e-9)));
    }
    for (std::size_t s = 0; s < pslg.segments.size(); ++s) {
      const int p = pslg.segments[s].partner;
      if (p >= 0) pieces[s] = pieces[p] = std::max(pieces[s], pieces[p]);
    }

    std::vector<int> first_piece(pslg.segments.size(), kNone);
    for (std::size_t s = 0; s < pslg.segments.size(); ++s) {
      const auto& seg = pslg.segments[s];
      const Point a = pslg.points[seg.a], b = pslg.points[seg.b];
      int prev = vid[seg.a];
      first_piece[s] = static_cast<int>(segs_.size());
      for (int k = 1; k <= pieces[s]; ++k) {
        int next;
        if (k == pieces[s]) {
          next = vid[seg.b];
        } else {
          const double t = static_cast<double>(k) / pieces[s];
          next = insert_vertex({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
        }
        segs_.push_back({prev, next, seg.tag, kNone, true});
        prev = next;
      }
    }
    for (std::size_t s = 0; s < pslg.segments.size(); ++s) {
      const int p = pslg.segments[s].partner;
      if (p < 0) continue;
      for (int k = 0; k < pieces[s]; ++k) segs_[first_piece[s] + k].partner = first_piece[p] + k;
    }
  }

  // -- point location and insertion --------------------------------------------------------
  Located locate(Point p, int start) {
    Located out;
    int t = (start >= 0 && tris_[start].alive) ? start : last_alive();
    const std::size_t cap = 4 * tris_.size() + 100;
    for (std::size_t iter = 0; iter < cap; ++iter) {
      const auto& v = tris_[t].v;
      bool moved = false;
      const int off = static_cast<int>(walk_counter_++ % 3);
      for (int j = 0; j < 3 && !moved; ++j) {
        const int k = (j + off) % 3;
        const int a = v[(k + 1) % 3], b = v[(k + 2) % 3];
        if (orient2d(pts_[a], pts_[b], p) < 0) {
          const int s = seg_at(a, b);
          if (s != kNone) {
            out.blocked_seg = s;
            out.tri = t;
            return out;
          }
          const int n = tri_of_edge(b, a);
          if (n == kNone) {
            out.tri = kNone;
            return out;
          }
          t = n;
          moved = true;
        }
      }
      if (!moved) {
        out.tri = t;
        for (int k = 0; k < 3; ++k)
          if (pts_[v[k]] == p) out.existing_vertex = v[k];
        return out;
      }
    }
    return brute_force_locate(p);
  }

  Located brute_force_locate(Point p) const {
    Located out;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      const auto& v = tris_[t].v;
      if (orient2d(pts_[v[0]], pts_[v[1]], p) >= 0 && orient2d(pts_[v[1]], pts_[v[2]], p) >= 0 &&
          orient2d(pts_[v[2]], pts_[v[0]], p) >= 0) {
        out.tri = t;
        for (int k = 0; k < 3; ++k)
          if (pts_[v[k]] == p) out.existing_vertex = v[k];
        return out;
      }
    }
    return out;
  }

  int last_alive() const {
    if (last_tri_ >= 0 && last_tri_ < static_cast<int>(tris_.size()) && tris_[last_tri_].alive) return last_tri_;
    for (int t = static_cast<int>(tris_.size()) - 1; t >= 0; --t)
      if (tris_[t].alive) return t;
    throw NumericalError("MeshQualityFailure", "triangulation has no triangles left");
  }

  bool in_circumcircle(int t, Point p) const {
    const auto& v = tris_[t].v;
    return incircle(pts_[v[0]], pts_[v[1]], pts_[v[2]], p) > 0;
  }

  // Bowyer-Watson cavity restricted by constrained edges; `allowed` edges may be collinear
  // with p (the split segment). Triangles producing non-visible boundary edges are pruned.
  std::vector<int> cavity(Point p, const std::vector<int>& seeds, std::vector<Edge>& boundary,
                          const std::vector<Edge>& allowed) {
    ++generation_;
    const unsigned in = generation_;
    std::vector<int> cav, stack(seeds.begin(), seeds.end());
    for (int s : seeds) stamp_[s] = in;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      cav.push_back(t);
      const auto& v = tris_[t].v;
      for (int k = 0; k < 3; ++k) {
        const int a = v[k], b = v[(k + 1) % 3];
        if (seg_at(a, b) != kNone) continue;
        const int n = tri_of_edge(b, a);
        if (n == kNone || stamp_[n] == in) continue;
        if (in_circumcircle(n, p)) {
          stamp_[n] = in;
          stack.push_back(n);
        }
      }
    }
    auto is_allowed = [&](int a, int b) {
      for (const auto& e : allowed)
        if (e.u == a && e.v == b) return true;
      return false;
    };
    auto is_seed = [&](int t) { return std::find(seeds.begin(), seeds.end(), t) != seeds.end(); };
    for (;;) {
      boundary.clear();
      bool pruned = false;
      for (int t : cav) {
        if (stamp_[t] != in) continue;
        const auto& v = tris_[t].v;
        for (int k = 0; k < 3; ++k) {
          const int a = v[k], b = v[(k + 1) % 3];
          const int n = tri_of_edge(b, a);
          const bool interior = n != kNone && stamp_[n] == in && seg_at(a, b) == kNone;
          if (interior) continue;
          if (orient2d(pts_[a], pts_[b], p) <= 0 && !is_allowed(a, b) && !is_seed(t)) {
            stamp_[t] = 0;
            pruned = true;
            break;
          }
          boundary.push_back({a, b});
        }
      }
      if (!pruned) break;
      // Keep only the part connected to the seeds.
      ++generation_;
      const unsigned in2 = generation_;
      std::vector<int> keep;
      stack.assign(seeds.begin(), seeds.end());
      for (int s : seeds) stamp_[s] = in2;
      std::vector<char> member(tris_.size(), 0);
      for (int t : cav)
        if (stamp_[t] == in || stamp_[t] == in2) member[t] = 1;
      while (!stack.empty()) {
        const int t = stack.back();
        stack.pop_back();
        keep.push_back(t);
        const auto& v = tris_[t].v;
        for (int k = 0; k < 3; ++k) {
          const int a = v[k], b = v[(k + 1) % 3];
          if (seg_at(a, b) != kNone) continue;
          const int n = tri_of_edge(b, a);
          if (n == kNone || !member[n] || stamp_[n] == in2) continue;
          stamp_[n] = in2;
          stack.push_back(n);
        }
      }
      cav = std::move(keep);
      for (int t : cav) stamp_[t] = in;
    }
    std::vector<int> out;
    for (int t : cav)
      if (stamp_[t] == in) out.push_back(t);
    return out;
  }

  // `skip` lists the split segment (both orientations), which is replaced by its halves.
  int fill_cavity(Point p, const std::vector<int>& cav, const std::vector<Edge>& boundary,
                  const std::vector<Edge>& skip = {}) {
    pts_.push_back(p);
    const int id = static_cast<int>(pts_.size()) - 1;
    for (int t : cav) kill_triangle(t);
    for (const auto& e : boundary) {
      bool skipped = false;
      for (const auto& k : skip) skipped = skipped || (k.u == e.u && k.v == e.v);
      if (!skipped) add_triangle(e.u, e.v, id);
    }
    if (pts_.size() > opts_.max_vertices)
      throw NumericalError("MeshQualityFailure", "mesh refinement exceeded the vertex budget");
    return id;
  }

#ifdef MESHER_DEBUG
  void check_consistency(Point p) {
    for (int t = 0; t < (int)tris_.size(); ++t) {
      if (!tris_[t].alive) continue;
      auto& v = tris_[t].v;
      if (orient2d(pts_[v[0]], pts_[v[1]], pts_[v[2]]) <= 0) { fprintf(stderr, "flat tri after %.17g %.17g: (%.17g %.17g) (%.17g %.17g) (%.17g %.17g)\n", p.x, p.y, pts_[v[0]].x, pts_[v[0]].y, pts_[v[1]].x, pts_[v[1]].y, pts_[v[2]].x, pts_[v[2]].y); abort(); }
      for (int k = 0; k < 3; ++k) if (tri_of_edge(v[k], v[(k+1)%3]) != t) { fprintf(stderr, "edge map broken after %g %g\n", p.x, p.y); abort(); }
    }
    if (constrained_) for (auto& sg : segs_) if (sg.alive && !edge_exists(sg.a, sg.b)) { fprintf(stderr, "seg lost after %.17g %.17g: %g %g - %g %g\n", p.x, p.y, pts_[sg.a].x, pts_[sg.a].y, pts_[sg.b].x, pts_[sg.b].y); abort(); }
  }
#endif

  int insert_vertex(Point p) {
    const Located loc = locate(p, last_tri_);
    if (loc.existing_vertex != kNone) return loc.existing_vertex;
    if (loc.tri == kNone) throw NumericalError("MeshQualityFailure", "point outside triangulation");
    std::vector<Edge> boundary;
    auto cav = cavity(p, {loc.tri}, boundary, {});
    const int id = fill_cavity(p, cav, boundary);
#ifdef MESHER_DEBUG
    check_consistency(p);
#endif
    return id;
  }

  // Splits a segment at its midpoint and, if present, its partner at the partner midpoint.
  void split_segment(int s) {
    const int partner = segs_[s].partner;
    const int m = split_one(s);
    if (partner != kNone && segs_[partner].alive) {
      const int pm = split_one(partner);
      const int n = static_cast<int>(segs_.size());
      // split_one appended (a, m), (m, b) for s at n-4, n-3 and for partner at n-2, n-1.
      segs_[n - 4].partner = n - 2;
      segs_[n - 3].partner = n - 1;
      segs_[n - 2].partner = n - 4;
      segs_[n - 1].partner = n - 3;
      (void)m;
      (void)pm;
    }
  }

  int split_one(int s) {
    Seg seg = segs_[s];
    const Point a = pts_[seg.a], b = pts_[seg.b];
    const Point mid{0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
    int m;
    if (constrained_) {
      std::vector<int> seeds;
      const int t1 = tri_of_edge(seg.a, seg.b), t2 = tri_of_edge(seg.b, seg.a);
      if (t1 != kNone) seeds.push_back(t1);
      if (t2 != kNone) seeds.push_back(t2);
      if (seeds.empty())
        throw NumericalError("MeshQualityFailure", "segment (" + std::to_string(a.x) + "," + std::to_string(a.y) +
                                                       ")-(" + std::to_string(b.x) + "," + std::to_string(b.y) +
                                                       ") lost from triangulation");
      seg_of_edge_.erase(undirected_key(seg.a, seg.b));
      std::vector<Edge> boundary;
      // The split edge is temporarily unconstrained; mark it allowed on both sides and
      // keep the cavity from crossing it by re-registering it during the search.
      seg_of_edge_[undirected_key(seg.a, seg.b)] = s;
      const std::vector<Edge> split_edge{{seg.a, seg.b}, {seg.b, seg.a}};
      auto cav = cavity(mid, seeds, boundary, split_edge);
      seg_of_edge_.erase(undirected_key(seg.a, seg.b));
      m = fill_cavity(mid, cav, boundary, split_edge);
    } else {
      m = insert_vertex(mid);
    }
    segs_[s].alive = false;
    const int n1 = static_cast<int>(segs_.size());
    segs_.push_back({seg.a, m, seg.tag, kNone, true});
    segs_.push_back({m, seg.b, seg.tag, kNone, true});
    if (constrained_) {
      seg_of_edge_[undirected_key(seg.a, m)] = n1;
      seg_of_edge_[undirected_key(m, seg.b)] = n1 + 1;
    }
#ifdef MESHER_DEBUG
    check_consistency(mid);
#endif
    return m;
  }

  // -- phases ---------------------------------------------------------------------------
  void recover_segments() {
    for (int pass = 0; pass < 200; ++pass) {
      bool changed = false;
      for (std::size_t s = 0; s < segs_.size(); ++s) {
        if (!segs_[s].alive) continue;
        if (!edge_exists(segs_[s].a, segs_[s].b)) {
          split_segment(static_cast<int>(s));
          changed = true;
        }
      }
      if (!changed) return;
    }
    throw NumericalError("MeshQualityFailure", "segment recovery did not converge");
  }

  void carve(const std::vector<Point>& holes) {
    constrained_ = true;
    for (std::size_t s = 0; s < segs_.size(); ++s)
      if (segs_[s].alive) seg_of_edge_[undirected_key(segs_[s].a, segs_[s].b)] = static_cast<int>(s);

    std::vector<int> stack;
    for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
      if (!tris_[t].alive) continue;
      const auto& v = tris_[t].v;
      if (v[0] < 3 || v[1] < 3 || v[2] < 3) stack.push_back(t);
    }
    for (const auto& h : holes) {
      const bool was = constrained_;
      constrained_ = false;
      const Located loc = locate(h, last_alive());
      constrained_ = was;
      if (loc.tri != kNone) stack.push_back(loc.tri);
    }
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      if (!tris_[t].alive) continue;
      const auto v = tris_[t].v;
      kill_triangle(t);
      for (int k = 0; k < 3; ++k) {
        const int a = v[k], b = v[(k + 1) % 3];
        if (seg_at(a, b) != kNone) continue;
        const int n = tri_of_edge(b, a);
        if (n != kNone && tris_[n].alive) stack.push_back(n);
      }
    }
    last_tri_ = last_alive();
  }

  bool encroached(const Seg& s) const {
    const Point a = pts_[s.a], b = pts_[s.b];
    for (int t : {tri_of_edge(s.a, s.b), tri_of_edge(s.b, s.a)}) {
      if (t == kNone) continue;
      const auto& v = tris_[t].v;
      for (int k = 0; k < 3; ++k) {
        if (v[k] == s.a || v[k] == s.b) continue;
        const Point c = pts_[v[k]];
        if (dot(a - c, b - c) < 0.0) return true;
      }
    }
    return false;
  }

  bool is_bad(int t) const {
    const auto& v = tris_[t].v;
    const Point p0 = pts_[v[0]], p1 = pts_[v[1]], p2 = pts_[v[2]];
    const double l0 = distance(p1, p2), l1 = distance(p2, p0), l2 = distance(p0, p1);
    const double lmin = std::min({l0, l1, l2}), lmax = std::max({l0, l1, l2});
    const double area2 = std::abs((p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x));
    // circumradius R = l0 l1 l2 / (2 area2); sin(min angle) = lmin / (2R)
    const double sin_min = lmin * area2 / (l0 * l1 * l2);
    if (sin_min < sin_bound_) return true;
    const Point c = (1.0 / 3.0) * (p0 + p1 + p2);
    return lmax > size_(c);
  }

  double sin_bound_ = 0.0;

  void refine() {
    sin_bound_ = std::sin(opts_.min_angle_deg * std::numbers::pi / 180.0);
    for (;;) {
      bool changed = false;
      for (bool again = true; again;) {
        again = false;
        for (std::size_t s = 0; s < segs_.size(); ++s) {
          if (segs_[s].alive && encroached(segs_[s])) {
            split_segment(static_cast<int>(s));
            again = changed = true;
          }
        }
      }
      std::vector<int> bad;
      for (int t = 0; t < static_cast<int>(tris_.size()); ++t)
        if (tris_[t].alive && is_bad(t)) bad.push_back(t);
      for (int t : bad) {
        if (!tris_[t].alive || !is_bad(t)) continue;
        const auto& v = tris_[t].v;
        const Point c = predicates::circumcenter(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
        const Located loc = locate(c, t);
        if (loc.blocked_seg != kNone) {
          if (segs_[loc.blocked_seg].alive) {
            split_segment(loc.blocked_seg);
            changed = true;
          }
          continue;
        }
        if (loc.tri == kNone || loc.existing_vertex != kNone) continue;
        std::vector<Edge> boundary;
        auto cav = cavity(c, {loc.tri}, boundary, {});
        bool encroaches = false, degenerate = false;
        for (const auto& e : boundary) {
          if (orient2d(pts_[e.u], pts_[e.v], c) <= 0) degenerate = true;
          const int s = seg_at(e.u, e.v);
          if (s == kNone) continue;
          if (dot(pts_[e.u] - c, pts_[e.v] - c) < 0.0) {
            split_segment(s);
            encroaches = true;
            break;
          }
        }
        if (!encroaches && degenerate) continue;
        if (!encroaches) fill_cavity(c, cav, boundary);
#ifdef MESHER_DEBUG
        if (!encroaches) check_consistency(c);
#endif
        changed = true;
      }
      if (!changed) break;
    }
  }
};

Mesh Refiner::extract() const {
  Mesh mesh;
  std::vector<int> remap(pts_.size(), kNone);
  std::vector<char> used(pts_.size(), 0);
  for (const auto& t : tris_)
    if (t.alive)
      for (int v : t.v) used[v] = 1;
  for (std::size_t i = 3; i < pts_.size(); ++i) {
    if (!used[i]) continue;
    remap[i] = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pts_[i]);
  }
  for (const auto& t : tris_) {
    if (!t.alive) continue;
    mesh.triangles.push_back({remap[t.v[0]], remap[t.v[1]], remap[t.v[2]]});
  }
  for (const auto& s : segs_) {
    if (!s.alive) continue;
    const bool fwd = tri_of_edge(s.a, s.b) != kNone;
    const bool bwd = tri_of_edge(s.b, s.a) != kNone;
    if (fwd && bwd) {
      if (!is_interface_tag(s.tag))
        throw NumericalError("MeshQualityFailure",
                             "boundary segment " + std::string(to_string(s.tag)) + " lies inside the domain");
      mesh.interface_edges.push_back({remap[s.a], remap[s.b], s.tag});
    } else if (fwd) {
      mesh.boundary_edges.push_back({remap[s.a], remap[s.b], s.tag});
    } else if (bwd) {
      mesh.boundary_edges.push_back({remap[s.b], remap[s.a], s.tag});
    }
    // Segments bounding carved holes from both sides vanish with their triangles.
  }
  return mesh;
}

}  // namespace

Mesh generate_mesh(const Pslg& pslg, const SizeField& size, const MesherOptions& options) {
  Refiner refiner(pslg, size, options);
  Mesh mesh = refiner.extract();
  validate(mesh);
  if (mesh.min_angle_deg() < options.min_angle_deg - 1e-9)
    throw NumericalError("MeshQualityFailure", "minimum angle " + std::to_string(mesh.min_angle_deg()) +
                                                   " below threshold");
  return mesh;
}

}  // namespace stentflow
