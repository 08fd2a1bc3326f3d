#include "invertlab/tracer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace invertlab {

namespace {

// Winding number of the plane-coordinates of F around q along a loop.
int loop_winding(const SurfaceMesh& mesh, const std::vector<int>& loop, const MapSpec& map, const Point& q,
                 const Matrix& basis) {
  double total = 0.0;
  Eigen::Vector2d prev;
  for (std::size_t i = 0; i <= loop.size(); ++i) {
    const Point y = map.evaluate(mesh.vertex(loop[i % loop.size()])) - q;
    const Eigen::Vector2d c = basis.transpose() * y;
    if (i > 0) total += std::atan2(prev.x() * c.y() - prev.y() * c.x(), prev.dot(c));
    prev = c;
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

}  // namespace

CondenserDomain mark_condenser_boundaries(const SurfaceMesh& mesh, const MapSpec& map, const Point& q,
                                          const std::vector<Point>& fiber_points, double radius,
                                          double vertex_tol) {
  if (fiber_points.empty()) throw PreconditionError("mark_condenser_boundaries needs fiber points");
  if (!(radius > 0.0)) throw PreconditionError("ball radius must be positive");
  const std::size_t nv = mesh.vertex_count();

  std::vector<bool> in_ball(nv);
  for (std::size_t v = 0; v < nv; ++v) in_ball[v] = (map.evaluate(mesh.vertex(static_cast<int>(v))) - q).norm() < radius;

  std::vector<int> owner(nv, -1);
  CondenserDomain dom;
  for (std::size_t i = 0; i < fiber_points.size(); ++i) {
    const int p = mesh.nearest_vertex(fiber_points[i]);
    if ((mesh.vertex(p) - fiber_points[i]).norm() > vertex_tol) {
      throw PreconditionError("fiber point " + std::to_string(i + 1) + " is not a mesh vertex");
    }
    if (!in_ball[static_cast<std::size_t>(p)]) throw PreconditionError("fiber point does not map into the ball");
    if (owner[static_cast<std::size_t>(p)] >= 0) throw PreconditionError("condenser patches overlap");
    std::vector<int> stack{p};
    owner[static_cast<std::size_t>(p)] = static_cast<int>(i);
    std::size_t size = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++size;
      if (mesh.is_boundary_vertex(v)) {
        throw PreconditionError("patch U" + std::to_string(i + 1) + " reaches the truncation boundary; shrink W");
      }
      for (int w : mesh.vertex_neighbors(v)) {
        if (!in_ball[static_cast<std::size_t>(w)]) continue;
        const int o = owner[static_cast<std::size_t>(w)];
        if (o == static_cast<int>(i)) continue;
        if (o >= 0) throw PreconditionError("condenser patches overlap");
        owner[static_cast<std::size_t>(w)] = static_cast<int>(i);
        stack.push_back(w);
      }
    }
    dom.patch_sizes.push_back(size);
  }

  // Drop every triangle touching a patch, then compact.
  std::vector<Triangle> kept;
  for (const auto& t : mesh.triangles()) {
    if (owner[static_cast<std::size_t>(t[0])] < 0 && owner[static_cast<std::size_t>(t[1])] < 0 &&
        owner[static_cast<std::size_t>(t[2])] < 0) {
      kept.push_back(t);
    }
  }
  std::vector<int> remap(nv, -1);
  std::vector<Point> verts;
  for (auto& t : kept) {
    for (int& v : t) {
      auto& r = remap[static_cast<std::size_t>(v)];
      if (r < 0) {
        r = static_cast<int>(verts.size());
        verts.push_back(mesh.vertex(v));
      }
      v = r;
    }
  }
  MeshAttributes attrs = mesh.attributes();
  attrs.marked.clear();
  for (const auto& m : mesh.marked()) {
    if (remap[static_cast<std::size_t>(m.vertex)] >= 0) attrs.marked.push_back({m.label, remap[static_cast<std::size_t>(m.vertex)]});
  }
  dom.mesh = SurfaceMesh(mesh.dimension(), std::move(verts), std::move(kept), std::move(attrs));

  // A rim is a new boundary loop all of whose vertices neighbour patch i.
  std::vector<std::set<int>> rim_vertices(fiber_points.size());
  for (std::size_t v = 0; v < nv; ++v) {
    if (owner[v] >= 0) continue;
    for (int w : mesh.vertex_neighbors(static_cast<int>(v))) {
      const int o = owner[static_cast<std::size_t>(w)];
      if (o >= 0 && remap[v] >= 0) rim_vertices[static_cast<std::size_t>(o)].insert(remap[v]);
    }
  }
  dom.rims.assign(fiber_points.size(), {});
  for (const auto& loop : dom.mesh.boundary_loops()) {
    std::vector<int> hits(fiber_points.size(), 0);
    for (int v : loop) {
      for (std::size_t i = 0; i < fiber_points.size(); ++i) hits[i] += static_cast<int>(rim_vertices[i].count(v));
    }
    for (std::size_t i = 0; i < fiber_points.size(); ++i) {
      if (hits[i] == static_cast<int>(loop.size())) {
        if (!dom.rims[i].empty()) throw PreconditionError("patch U" + std::to_string(i + 1) + " has more than one rim");
        dom.rims[i] = loop;
      } else if (hits[i] > 0 && hits[i] * 2 > static_cast<int>(loop.size())) {
        throw PreconditionError("condenser patches touch; shrink W");
      }
    }
  }

  Matrix basis = Matrix::Identity(map.dimension(), 2);
  if (map.dimension() > 2) {
    // Plane coordinates: any orthonormal basis of the span of F(rim) - q.
    Matrix pts(map.dimension(), 0);
    for (std::size_t i = 0; i < dom.rims.size(); ++i) {
      for (int v : dom.rims[i]) {
        pts.conservativeResize(Eigen::NoChange, pts.cols() + 1);
        pts.col(pts.cols() - 1) = map.evaluate(dom.mesh.vertex(v)) - q;
      }
      break;
    }
    Eigen::JacobiSVD<Matrix> svd(pts, Eigen::ComputeThinU);
    basis = svd.matrixU().leftCols(2);
  }
  for (std::size_t i = 0; i < dom.rims.size(); ++i) {
    if (dom.rims[i].empty()) throw PreconditionError("patch U" + std::to_string(i + 1) + " has no closed rim");
    const int w = loop_winding(dom.mesh, dom.rims[i], map, q, basis);
    if (std::abs(w) != 1) {
      throw PreconditionError("F winds " + std::to_string(w) + " times around q along T" + std::to_string(i + 1) +
                              "; not injective on U" + std::to_string(i + 1));
    }
  }
  return dom;
}

}  // namespace invertlab
