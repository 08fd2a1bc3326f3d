#pragma once

#include "invertlab/common.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <iosfwd>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace invertlab {

using Triangle = std::array<int, 3>;

/// Pulls points back onto the surface a mesh approximates. Used by refine()
/// to place new vertices; `on_boundary` lets analytic meshes snap boundary
/// midpoints to their exact boundary curves.
class SurfaceProjector {
 public:
  virtual ~SurfaceProjector() = default;
  virtual std::optional<Point> project(const Point& p, bool on_boundary) const = 0;
  /// Distance-like residual of p from the surface (0 for exact meshes).
  virtual double residual(const Point& p) const = 0;
};

struct MarkedVertex {
  std::string label;
  int vertex = -1;
};

struct MeshAttributes {
  std::vector<MarkedVertex> marked;
  double truncation_radius = std::numeric_limits<double>::infinity();
  std::shared_ptr<const SurfaceProjector> projector;
};

/// Triangulated surface embedded in R^n. Immutable after construction;
/// boundary loops, adjacency and per-vertex residuals are derived once.
class SurfaceMesh {
 public:
  SurfaceMesh() = default;
  SurfaceMesh(int dim, std::vector<Point> vertices, std::vector<Triangle> triangles, MeshAttributes attrs = {});

  int dimension() const { return dim_; }
  std::size_t vertex_count() const { return vertices_.size(); }
  std::size_t triangle_count() const { return triangles_.size(); }
  const std::vector<Point>& vertices() const { return vertices_; }
  const Point& vertex(int i) const { return vertices_[static_cast<std::size_t>(i)]; }
  const std::vector<Triangle>& triangles() const { return triangles_; }

  /// Ordered boundary cycles; each runs with the surface on its left.
  const std::vector<std::vector<int>>& boundary_loops() const { return boundary_loops_; }
  bool is_boundary_vertex(int v) const { return on_boundary_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& vertex_triangles(int v) const { return vertex_triangles_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& vertex_neighbors(int v) const { return vertex_neighbors_[static_cast<std::size_t>(v)]; }

  const std::vector<MarkedVertex>& marked() const { return attrs_.marked; }
  std::optional<int> marked_vertex(const std::string& label) const;
  double truncation_radius() const { return attrs_.truncation_radius; }
  const std::shared_ptr<const SurfaceProjector>& projector() const { return attrs_.projector; }
  const MeshAttributes& attributes() const { return attrs_; }

  /// Per-vertex distance from the defining surface (projector residual).
  const std::vector<double>& residuals() const { return residuals_; }
  double max_residual() const;

  std::size_t edge_count() const { return edge_count_; }
  /// Edges shared by more than two triangles.
  std::size_t non_manifold_edges() const { return non_manifold_edges_; }
  /// Vertices where the boundary pinches (more than one outgoing boundary edge).
  std::size_t non_manifold_vertices() const { return non_manifold_vertices_; }

  double triangle_area(int t) const;
  /// Interior angles of triangle t in radians, at its three corners.
  std::array<double, 3> triangle_angles(int t) const;
  double min_angle_deg() const;

  /// Index of the vertex nearest to p.
  int nearest_vertex(const Point& p) const;

 private:
  void build_topology();

  int dim_ = 0;
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  MeshAttributes attrs_;
  std::vector<double> residuals_;
  std::vector<std::vector<int>> boundary_loops_;
  std::vector<bool> on_boundary_;
  std::vector<std::vector<int>> vertex_triangles_;
  std::vector<std::vector<int>> vertex_neighbors_;
  std::size_t edge_count_ = 0;
  std::size_t non_manifold_edges_ = 0;
  std::size_t non_manifold_vertices_ = 0;
};

struct ComponentTopology {
  std::size_t vertices = 0;
  std::size_t edges = 0;
  std::size_t triangles = 0;
  long euler_characteristic = 0;
  std::size_t boundary_loops = 0;
  /// (2 - chi - b) / 2 when that is a non-negative integer and the
  /// component is a manifold; otherwise empty ("indeterminate").
  std::optional<long> genus;
};

struct TopologyReport {
  std::vector<ComponentTopology> components;
  /// Component of every vertex (-1 for isolated vertices).
  std::vector<int> vertex_component;
  /// (label, component) for each marked vertex.
  std::vector<std::pair<std::string, int>> marked_components;
  std::size_t non_manifold_edges = 0;
  std::size_t non_manifold_vertices = 0;

  std::size_t component_count() const { return components.size(); }
  long euler_characteristic() const;
  std::size_t boundary_loop_count() const;
};

TopologyReport mesh_topology(const SurfaceMesh& mesh);

/// Mesh made of `triangles` (indices into `mesh`), unused vertices dropped.
/// Marked vertices that survive keep their labels; attributes carry over.
/// `remap` receives old -> new vertex indices (-1 when dropped).
SurfaceMesh submesh(const SurfaceMesh& mesh, const std::vector<Triangle>& triangles,
                    std::vector<int>* remap = nullptr);
/// Connected component containing `vertex`.
SurfaceMesh extract_component(const SurfaceMesh& mesh, int vertex, std::vector<int>* remap = nullptr);

/// OFF export: `OFF`, counts line, one vertex per line (all n coordinates),
/// faces as `3 i j k`.
void write_off(const SurfaceMesh& mesh, std::ostream& out);
/// Reads an OFF file with triangular faces; the vertex dimension is taken
/// from the first vertex line.
SurfaceMesh read_off(std::istream& in);

/// Sidecar for an OFF export: marked vertices, boundary loops, truncation
/// radius, residual bound and topology.
nlohmann::json mesh_sidecar(const SurfaceMesh& mesh);
nlohmann::json to_json(const TopologyReport& topo);

}  // namespace invertlab
