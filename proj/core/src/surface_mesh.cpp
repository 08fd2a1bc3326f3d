#include "invertlab/surface_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <unordered_map>

namespace invertlab {

namespace {

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      auto& p = parent[static_cast<std::size_t>(x)];
      p = parent[static_cast<std::size_t>(p)];
      x = p;
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
  }
};

}  // namespace

SurfaceMesh::SurfaceMesh(int dim, std::vector<Point> vertices, std::vector<Triangle> triangles, MeshAttributes attrs)
    : dim_(dim), vertices_(std::move(vertices)), triangles_(std::move(triangles)), attrs_(std::move(attrs)) {
  const int nv = static_cast<int>(vertices_.size());
  for (const auto& v : vertices_) {
    if (v.size() != dim_) throw PreconditionError("mesh vertex has wrong dimension");
  }
  for (const auto& t : triangles_) {
    for (int k : t) {
      if (k < 0 || k >= nv) throw PreconditionError("triangle references a missing vertex");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) throw PreconditionError("degenerate triangle");
  }
  for (const auto& m : attrs_.marked) {
    if (m.vertex < 0 || m.vertex >= nv) throw PreconditionError("marked vertex out of range: " + m.label);
  }
  residuals_.assign(vertices_.size(), 0.0);
  if (attrs_.projector) {
    for (std::size_t i = 0; i < vertices_.size(); ++i) residuals_[i] = attrs_.projector->residual(vertices_[i]);
  }
  build_topology();
}

void SurfaceMesh::build_topology() {
  const std::size_t nv = vertices_.size();
  vertex_triangles_.assign(nv, {});
  vertex_neighbors_.assign(nv, {});
  on_boundary_.assign(nv, false);

  std::unordered_map<std::uint64_t, int> edge_use;
  edge_use.reserve(triangles_.size() * 2);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int k = 0; k < 3; ++k) {
      vertex_triangles_[static_cast<std::size_t>(tri[k])].push_back(static_cast<int>(t));
      ++edge_use[edge_key(tri[k], tri[(k + 1) % 3])];
    }
  }
  edge_count_ = edge_use.size();
  non_manifold_edges_ = 0;
  for (const auto& [key, count] : edge_use) {
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    vertex_neighbors_[static_cast<std::size_t>(a)].push_back(b);
    vertex_neighbors_[static_cast<std::size_t>(b)].push_back(a);
    if (count > 2) ++non_manifold_edges_;
  }
  for (auto& nb : vertex_neighbors_) std::sort(nb.begin(), nb.end());

  // Boundary half-edges keep the triangle's orientation, so loops run with
  // the surface on their left.
  std::map<int, std::vector<int>> outgoing;
  std::size_t n_half = 0;
  for (const auto& tri : triangles_) {
    for (int k = 0; k < 3; ++k) {
      const int a = tri[k];
      const int b = tri[(k + 1) % 3];
      if (edge_use[edge_key(a, b)] == 1) {
        outgoing[a].push_back(b);
        on_boundary_[static_cast<std::size_t>(a)] = true;
        on_boundary_[static_cast<std::size_t>(b)] = true;
        ++n_half;
      }
    }
  }
  non_manifold_vertices_ = 0;
  for (auto& [v, outs] : outgoing) {
    std::sort(outs.begin(), outs.end());
    if (outs.size() > 1) ++non_manifold_vertices_;
  }

  boundary_loops_.clear();
  std::size_t used = 0;
  for (auto& [start, outs] : outgoing) {
    while (!outs.empty()) {
      std::vector<int> loop{start};
      int cur = outs.front();
      outs.erase(outs.begin());
      ++used;
      while (cur != start) {
        loop.push_back(cur);
        auto it = outgoing.find(cur);
        if (it == outgoing.end() || it->second.empty()) break;  // open chain on a broken mesh
        cur = it->second.front();
        it->second.erase(it->second.begin());
        ++used;
        if (used > n_half) break;
      }
      boundary_loops_.push_back(std::move(loop));
    }
  }
}

std::optional<int> SurfaceMesh::marked_vertex(const std::string& label) const {
  for (const auto& m : attrs_.marked) {
    if (m.label == label) return m.vertex;
  }
  return std::nullopt;
}

double SurfaceMesh::max_residual() const {
  double m = 0.0;
  for (double r : residuals_) m = std::max(m, r);
  return m;
}

double SurfaceMesh::triangle_area(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  const Point e1 = vertex(tri[1]) - vertex(tri[0]);
  const Point e2 = vertex(tri[2]) - vertex(tri[0]);
  const double a = e1.squaredNorm() * e2.squaredNorm() - std::pow(e1.dot(e2), 2);
  return 0.5 * std::sqrt(std::max(a, 0.0));
}

std::array<double, 3> SurfaceMesh::triangle_angles(int t) const {
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  std::array<double, 3> out{};
  for (int k = 0; k < 3; ++k) {
    const Point u = vertex(tri[(k + 1) % 3]) - vertex(tri[k]);
    const Point v = vertex(tri[(k + 2) % 3]) - vertex(tri[k]);
    const double c = u.dot(v) / (u.norm() * v.norm());
    out[static_cast<std::size_t>(k)] = std::acos(std::clamp(c, -1.0, 1.0));
  }
  return out;
}

double SurfaceMesh::min_angle_deg() const {
  double m = 180.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (double a : triangle_angles(static_cast<int>(t))) m = std::min(m, a * 180.0 / M_PI);
  }
  return m;
}

int SurfaceMesh::nearest_vertex(const Point& p) const {
  if (vertices_.empty()) throw PreconditionError("nearest_vertex on an empty mesh");
  int best = 0;
  double bd = (vertices_[0] - p).squaredNorm();
  for (std::size_t i = 1; i < vertices_.size(); ++i) {
    const double d = (vertices_[i] - p).squaredNorm();
    if (d < bd) {
      bd = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

long TopologyReport::euler_characteristic() const {
  long s = 0;
  for (const auto& c : components) s += c.euler_characteristic;
  return s;
}

std::size_t TopologyReport::boundary_loop_count() const {
  std::size_t s = 0;
  for (const auto& c : components) s += c.boundary_loops;
  return s;
}

TopologyReport mesh_topology(const SurfaceMesh& mesh) {
  const std::size_t nv = mesh.vertex_count();
  DisjointSets ds(nv);
  for (const auto& t : mesh.triangles()) {
    ds.unite(t[0], t[1]);
    ds.unite(t[1], t[2]);
  }

  TopologyReport rep;
  rep.non_manifold_edges = mesh.non_manifold_edges();
  rep.non_manifold_vertices = mesh.non_manifold_vertices();
  rep.vertex_component.assign(nv, -1);

  // Components are numbered in order of their smallest vertex.
  std::map<int, int> root_to_comp;
  for (std::size_t v = 0; v < nv; ++v) {
    if (mesh.vertex_triangles(static_cast<int>(v)).empty()) continue;
    const int r = ds.find(static_cast<int>(v));
    auto [it, inserted] = root_to_comp.emplace(r, static_cast<int>(root_to_comp.size()));
    rep.vertex_component[v] = it->second;
  }
  rep.components.resize(root_to_comp.size());
  std::vector<bool> bad(root_to_comp.size(), false);

  for (std::size_t v = 0; v < nv; ++v) {
    const int c = rep.vertex_component[v];
    if (c < 0) continue;
    auto& comp = rep.components[static_cast<std::size_t>(c)];
    ++comp.vertices;
    for (int w : mesh.vertex_neighbors(static_cast<int>(v))) {
      if (w > static_cast<int>(v)) ++comp.edges;
    }
  }
  for (const auto& t : mesh.triangles()) {
    ++rep.components[static_cast<std::size_t>(rep.vertex_component[static_cast<std::size_t>(t[0])])].triangles;
  }
  for (const auto& loop : mesh.boundary_loops()) {
    const int c = rep.vertex_component[static_cast<std::size_t>(loop.front())];
    ++rep.components[static_cast<std::size_t>(c)].boundary_loops;
  }

  // Non-manifold features poison the genus of their component.
  if (mesh.non_manifold_edges() > 0 || mesh.non_manifold_vertices() > 0) {
    std::unordered_map<std::uint64_t, int> use;
    std::vector<int> outdeg(nv, 0);
    for (const auto& t : mesh.triangles()) {
      for (int k = 0; k < 3; ++k) ++use[edge_key(t[k], t[(k + 1) % 3])];
    }
    for (const auto& [key, n] : use) {
      if (n > 2) bad[static_cast<std::size_t>(rep.vertex_component[key >> 32])] = true;
    }
    for (const auto& t : mesh.triangles()) {
      for (int k = 0; k < 3; ++k) {
        if (use[edge_key(t[k], t[(k + 1) % 3])] == 1) ++outdeg[static_cast<std::size_t>(t[k])];
      }
    }
    for (std::size_t v = 0; v < nv; ++v) {
      if (outdeg[v] > 1) bad[static_cast<std::size_t>(rep.vertex_component[v])] = true;
    }
  }

  for (std::size_t c = 0; c < rep.components.size(); ++c) {
    auto& comp = rep.components[c];
    comp.euler_characteristic =
        static_cast<long>(comp.vertices) - static_cast<long>(comp.edges) + static_cast<long>(comp.triangles);
    const long twice_g = 2 - comp.euler_characteristic - static_cast<long>(comp.boundary_loops);
    if (!bad[c] && twice_g >= 0 && twice_g % 2 == 0) comp.genus = twice_g / 2;
  }

  for (const auto& m : mesh.marked()) {
    rep.marked_components.emplace_back(m.label, rep.vertex_component[static_cast<std::size_t>(m.vertex)]);
  }
  return rep;
}

SurfaceMesh submesh(const SurfaceMesh& mesh, const std::vector<Triangle>& triangles, std::vector<int>* remap) {
  std::vector<int> map(mesh.vertex_count(), -1);
  std::vector<Point> verts;
  std::vector<Triangle> tris = triangles;
  for (auto& t : tris) {
    for (int& v : t) {
      auto& m = map[static_cast<std::size_t>(v)];
      if (m < 0) {
        m = static_cast<int>(verts.size());
        verts.push_back(mesh.vertex(v));
      }
      v = m;
    }
  }
  MeshAttributes attrs = mesh.attributes();
  attrs.marked.clear();
  for (const auto& mv : mesh.marked()) {
    if (map[static_cast<std::size_t>(mv.vertex)] >= 0) attrs.marked.push_back({mv.label, map[static_cast<std::size_t>(mv.vertex)]});
  }
  if (remap) *remap = map;
  return SurfaceMesh(mesh.dimension(), std::move(verts), std::move(tris), std::move(attrs));
}

SurfaceMesh extract_component(const SurfaceMesh& mesh, int vertex, std::vector<int>* remap) {
  const TopologyReport topo = mesh_topology(mesh);
  const int c = topo.vertex_component.at(static_cast<std::size_t>(vertex));
  if (c < 0) throw PreconditionError("vertex belongs to no triangle");
  std::vector<Triangle> keep;
  for (const auto& t : mesh.triangles()) {
    if (topo.vertex_component[static_cast<std::size_t>(t[0])] == c) keep.push_back(t);
  }
  return submesh(mesh, keep, remap);
}

void write_off(const SurfaceMesh& mesh, std::ostream& out) {
  out << "OFF\n" << mesh.vertex_count() << ' ' << mesh.triangle_count() << " 0\n";
  out << std::setprecision(17);
  for (const auto& v : mesh.vertices()) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
    out << '\n';
  }
  for (const auto& t : mesh.triangles()) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

SurfaceMesh read_off(std::istream& in) {
  auto next_line = [&](std::string& line) {
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  };
  std::string line;
  if (!next_line(line) || line.rfind("OFF", 0) != 0) throw ConfigError("OFF: missing header");
  if (!next_line(line)) throw ConfigError("OFF: missing counts line");
  std::size_t nv = 0, nf = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf)) throw ConfigError("OFF: malformed counts line");
  }
  std::vector<Point> verts;
  int dim = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line(line)) throw ConfigError("OFF: truncated vertex list");
    std::istringstream ss(line);
    std::vector<double> c;
    double x;
    while (ss >> x) c.push_back(x);
    if (i == 0) dim = static_cast<int>(c.size());
    if (static_cast<int>(c.size()) != dim || dim == 0) {
      throw ConfigError("OFF: vertex " + std::to_string(i) + " has inconsistent dimension");
    }
    verts.emplace_back(Eigen::Map<const Point>(c.data(), dim));
  }
  std::vector<Triangle> tris;
  for (std::size_t i = 0; i < nf; ++i) {
    if (!next_line(line)) throw ConfigError("OFF: truncated face list");
    std::istringstream ss(line);
    int k = 0;
    Triangle t{};
    if (!(ss >> k >> t[0] >> t[1] >> t[2]) || k != 3) {
      throw ConfigError("OFF: face " + std::to_string(i) + " is not a triangle");
    }
    tris.push_back(t);
  }
  return SurfaceMesh(dim, std::move(verts), std::move(tris));
}

nlohmann::json to_json(const TopologyReport& topo) {
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : topo.components) {
    comps.push_back({{"vertices", c.vertices},
                     {"edges", c.edges},
                     {"triangles", c.triangles},
                     {"euler_characteristic", c.euler_characteristic},
                     {"boundary_loops", c.boundary_loops},
                     {"genus", c.genus ? nlohmann::json(*c.genus) : nlohmann::json("indeterminate")}});
  }
  nlohmann::json marked = nlohmann::json::object();
  for (const auto& [label, comp] : topo.marked_components) marked[label] = comp;
  return {{"component_count", topo.component_count()},
          {"euler_characteristic", topo.euler_characteristic()},
          {"boundary_loops", topo.boundary_loop_count()},
          {"components", comps},
          {"marked_components", marked},
          {"non_manifold_edges", topo.non_manifold_edges},
          {"non_manifold_vertices", topo.non_manifold_vertices}};
}

nlohmann::json mesh_sidecar(const SurfaceMesh& mesh) {
  nlohmann::json marked = nlohmann::json::array();
  for (const auto& m : mesh.marked()) marked.push_back({{"label", m.label}, {"vertex", m.vertex}});
  const double r = mesh.truncation_radius();
  return {{"dimension", mesh.dimension()},
          {"vertices", mesh.vertex_count()},
          {"triangles", mesh.triangle_count()},
          {"truncation_radius", std::isfinite(r) ? nlohmann::json(r) : nlohmann::json(nullptr)},
          {"max_residual", mesh.max_residual()},
          {"min_angle_deg", mesh.min_angle_deg()},
          {"marked", marked},
          {"boundary_loops", mesh.boundary_loops()},
          {"topology", to_json(mesh_topology(mesh))}};
}

}  // namespace invertlab
