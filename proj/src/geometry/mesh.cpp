#include "geometry/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

namespace stentflow {

std::string_view to_string(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::GammaIn: return "GammaIn";
    case BoundaryTag::GammaOut1: return "GammaOut1";
    case BoundaryTag::GammaOut2: return "GammaOut2";
    case BoundaryTag::Gamma1: return "Gamma1";
    case BoundaryTag::Gamma2: return "Gamma2";
    case BoundaryTag::GammaEps: return "GammaEps";
    case BoundaryTag::Gamma0: return "Gamma0";
    case BoundaryTag::StripLeft: return "StripLeft";
    case BoundaryTag::StripRight: return "StripRight";
    case BoundaryTag::StripTop: return "StripTop";
    case BoundaryTag::StripBottom: return "StripBottom";
    case BoundaryTag::Sigma: return "Sigma";
  }
  return "?";
}

std::optional<BoundaryTag> tag_from_string(std::string_view name) {
  for (BoundaryTag t : kAllTags)
    if (to_string(t) == name) return t;
  return std::nullopt;
}

std::string_view to_string(FlowCase c) {
  return c == FlowCase::Collateral ? "collateral" : "aneurysm";
}

std::optional<FlowCase> flow_case_from_string(std::string_view name) {
  if (name == "collateral") return FlowCase::Collateral;
  if (name == "aneurysm") return FlowCase::Aneurysm;
  return std::nullopt;
}

double Mesh::signed_area(int tri) const {
  const auto& t = triangles[tri];
  const Point a = vertices[t[0]], b = vertices[t[1]], c = vertices[t[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x));
}

double Mesh::total_area() const {
  double s = 0.0;
  for (int i = 0; i < static_cast<int>(triangles.size()); ++i) s += signed_area(i);
  return s;
}

double Mesh::min_angle_deg() const {
  double best = 180.0;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Point o = vertices[t[k]];
      const Vec2 u = vertices[t[(k + 1) % 3]] - o;
      const Vec2 v = vertices[t[(k + 2) % 3]] - o;
      const double c = std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0);
      best = std::min(best, std::acos(c) * 180.0 / std::numbers::pi);
    }
  }
  return best;
}

double Mesh::diameter(int tri) const {
  const auto& t = triangles[tri];
  double d = 0.0;
  for (int k = 0; k < 3; ++k)
    d = std::max(d, distance(vertices[t[k]], vertices[t[(k + 1) % 3]]));
  return d;
}

Point Mesh::centroid(int tri) const {
  const auto& t = triangles[tri];
  return (1.0 / 3.0) * (vertices[t[0]] + vertices[t[1]] + vertices[t[2]]);
}

void validate(const Mesh& mesh) {
  auto fail = [](const std::string& msg) { throw NumericalError("InvalidMesh", msg); };
  const int nv = static_cast<int>(mesh.vertices.size());
  std::map<std::pair<int, int>, int> use;
  for (int i = 0; i < static_cast<int>(mesh.triangles.size()); ++i) {
    const auto& t = mesh.triangles[i];
    for (int v : t)
      if (v < 0 || v >= nv) fail("triangle " + std::to_string(i) + " has a bad vertex index");
    if (!(mesh.signed_area(i) > 0.0))
      fail("triangle " + std::to_string(i) + " has non-positive signed area");
    for (int k = 0; k < 3; ++k) {
      int a = t[k], b = t[(k + 1) % 3];
      ++use[{std::min(a, b), std::max(a, b)}];
    }
  }
  std::map<std::pair<int, int>, int> tagged;
  for (const auto& e : mesh.boundary_edges) ++tagged[{std::min(e.a, e.b), std::max(e.a, e.b)}];
  for (const auto& [edge, count] : use) {
    if (count > 2) fail("edge shared by more than two triangles");
    if (count == 1) {
      auto it = tagged.find(edge);
      if (it == tagged.end() || it->second != 1)
        fail("boundary edge " + std::to_string(edge.first) + "-" + std::to_string(edge.second) +
             " is not tagged exactly once");
    }
  }
  for (const auto& [edge, count] : tagged) {
    auto it = use.find(edge);
    if (it == use.end() || it->second != 1 || count != 1) fail("tagged boundary edge is not on the boundary");
  }
  for (const auto& e : mesh.interface_edges) {
    auto it = use.find({std::min(e.a, e.b), std::max(e.a, e.b)});
    if (it == use.end() || it->second != 2) fail("interface edge is not an interior mesh edge");
  }
}

void write_mesh_text(std::ostream& os, const Mesh& mesh, const std::string& provenance) {
  if (!provenance.empty()) os << "# " << provenance << '\n';
  os << "vertices " << mesh.vertices.size() << " / triangles " << mesh.triangles.size()
     << " / edges " << mesh.boundary_edges.size() + mesh.interface_edges.size() << '\n';
  os << std::setprecision(17);
  for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges) os << e.a << ' ' << e.b << ' ' << to_string(e.tag) << '\n';
  for (const auto& e : mesh.interface_edges) os << e.a << ' ' << e.b << ' ' << to_string(e.tag) << '\n';
}

Mesh read_mesh_text(std::istream& is) {
  auto fail = [](const std::string& msg) { throw ConfigError("MeshFormat", msg); };
  std::string line;
  auto next_line = [&]() -> bool {
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  };
  if (!next_line()) fail("missing header line");
  std::size_t nv = 0, nt = 0, ne = 0;
  {
    std::istringstream hs(line);
    std::string w1, s1, w2, s2, w3;
    if (!(hs >> w1 >> nv >> s1 >> w2 >> nt >> s2 >> w3 >> ne) || w1 != "vertices" ||
        w2 != "triangles" || w3 != "edges" || s1 != "/" || s2 != "/")
      fail("malformed header: " + line);
  }
  Mesh mesh;
  mesh.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line()) fail("truncated vertex block");
    std::istringstream ls(line);
    Point p;
    if (!(ls >> p.x >> p.y)) fail("bad vertex line: " + line);
    mesh.vertices.push_back(p);
  }
  mesh.triangles.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    if (!next_line()) fail("truncated triangle block");
    std::istringstream ls(line);
    std::array<int, 3> t{};
    if (!(ls >> t[0] >> t[1] >> t[2])) fail("bad triangle line: " + line);
    mesh.triangles.push_back(t);
  }
  std::map<std::pair<int, int>, int> use;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++use[{std::min(t[k], t[(k + 1) % 3]), std::max(t[k], t[(k + 1) % 3])}];
  for (std::size_t i = 0; i < ne; ++i) {
    if (!next_line()) fail("truncated edge block");
    std::istringstream ls(line);
    TaggedEdge e;
    std::string name;
    if (!(ls >> e.a >> e.b >> name)) fail("bad edge line: " + line);
    auto tag = tag_from_string(name);
    if (!tag) fail("unknown boundary tag: " + name);
    e.tag = *tag;
    auto it = use.find({std::min(e.a, e.b), std::max(e.a, e.b)});
    const bool interior = it != use.end() && it->second == 2;
    (interior ? mesh.interface_edges : mesh.boundary_edges).push_back(e);
  }
  return mesh;
}

void write_vtk(std::ostream& os, const Mesh& mesh, const std::vector<VtkPointField>& fields,
               const std::string& title) {
  os << "# vtk DataFile Version 3.0\n" << (title.empty() ? "stentflow" : title) << "\nASCII\n";
  os << "DATASET UNSTRUCTURED_GRID\n";
  os << std::setprecision(12);
  os << "POINTS " << mesh.vertices.size() << " double\n";
  for (const auto& p : mesh.vertices) os << p.x << ' ' << p.y << " 0\n";
  os << "CELLS " << mesh.triangles.size() << ' ' << 4 * mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << "CELL_TYPES " << mesh.triangles.size() << '\n';
  for (std::size_t i = 0; i < mesh.triangles.size(); ++i) os << "5\n";
  if (fields.empty()) return;
  os << "POINT_DATA " << mesh.vertices.size() << '\n';
  for (const auto& f : fields) {
    if (f.components == 1) {
      os << "SCALARS " << f.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : f.values) os << v << '\n';
    } else {
      os << "VECTORS " << f.name << " double\n";
      for (std::size_t i = 0; i + 1 < f.values.size(); i += 2)
        os << f.values[i] << ' ' << f.values[i + 1] << " 0\n";
    }
  }
}

}  // namespace stentflow
