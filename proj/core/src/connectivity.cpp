#include "invertlab/fiber.hpp"
#include "invertlab/tracer.hpp"

#include <cmath>
#include <random>

namespace invertlab {

namespace {

constexpr int kLoopVertices = 16;

// Closed polygon through y0 around `center` inside span(u, v), traversed
// `turns` times (sign gives the orientation).
std::vector<Point> loop_through(const Point& y0, const Point& center, const Point& u, const Point& v, int turns) {
  const Point d = y0 - center;
  const double a = d.dot(u), b = d.dot(v);
  const Point off = d - a * u - b * v;
  std::vector<Point> out{y0};
  const int steps = kLoopVertices * std::abs(turns);
  const double sgn = turns > 0 ? 1.0 : -1.0;
  for (int k = 1; k <= steps; ++k) {
    const double t = sgn * 2.0 * M_PI * k / kLoopVertices;
    const double c = std::cos(t), s = std::sin(t);
    out.push_back(center + off + (a * c - b * s) * u + (a * s + b * c) * v);
  }
  out.back() = y0;
  return out;
}

}  // namespace

ComponentQuery same_component(const MapSpec& map, const AffineSubspace& subspace, const Point& p1, const Point& p2,
                              const ComponentQueryOptions& options) {
  const int n = map.dimension();
  if (p1.size() != n || p2.size() != n || subspace.base.size() != n || subspace.basis.rows() != n) {
    throw PreconditionError("same_component: dimension mismatch");
  }
  if (subspace.dimension() < 1) throw PreconditionError("same_component: subspace must have dimension >= 1");
  const Point y1 = map.evaluate(p1), y2 = map.evaluate(p2);
  const double tol = 1e-8 * (1.0 + y1.norm() + y2.norm());
  if (!subspace.contains(y1, tol) || !subspace.contains(y2, tol)) {
    throw PreconditionError("same_component: F(p1) and F(p2) must lie in the subspace");
  }

  ComponentQuery result;
  if ((p1 - p2).norm() <= options.match_tol) {
    result.verdict = Connectivity::Connected;
    result.witness = lift_path(map, p1, {y1}, options.lift);
    result.note = "p1 and p2 coincide";
    return result;
  }

  auto attempt = [&](const std::vector<Point>& target) {
    ++result.attempts;
    LiftedPath path = lift_path(map, p1, target, options.lift);
    if (path.complete() && (path.end() - p2).norm() <= options.match_tol) {
      result.verdict = Connectivity::Connected;
      result.witness = std::move(path);
      return true;
    }
    return false;
  };

  if (attempt({y1, y2})) {
    result.note = "straight target segment";
    return result;
  }

  const int d = subspace.dimension();
  const double radius = options.waypoint_radius.value_or(2.0 * (1.0 + (y1 - subspace.base).norm()));
  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit;
  auto random_in_subspace = [&]() {
    Eigen::VectorXd c(d);
    for (int i = 0; i < d; ++i) c[i] = gauss(rng);
    return Point(subspace.basis * c.normalized());
  };

  while (result.attempts < options.budget) {
    std::vector<Point> target;
    if (d == 1) {
      const Point w = y1 + radius * (2.0 * unit(rng) - 1.0) * subspace.basis.col(0);
      target = {y1, w, y2};
    } else {
      const Point u = random_in_subspace();
      Point v = random_in_subspace();
      v -= v.dot(u) * u;
      if (v.norm() < 1e-8) continue;
      v.normalize();
      const double r = radius * std::sqrt(unit(rng));
      const Point center = y1 + r * (std::cos(2.0 * M_PI * unit(rng)) * u + std::sin(2.0 * M_PI * unit(rng)) * v);
      static constexpr int kTurns[] = {1, -1, 2, -2};
      target = loop_through(y1, center, u, v, kTurns[result.attempts % 4]);
      target.push_back(y2);
    }
    if (attempt(target)) {
      result.note = "lifted waypoint loop";
      return result;
    }
  }

  result.verdict = Connectivity::NotFound;
  result.note = "no joining path found within the attempt budget";
  if (options.trace_radius && d == 2 && n >= 3) {
    try {
      const Plane plane = Plane::from_span(subspace.base, subspace.basis);
      const double R = *options.trace_radius;
      const SurfaceMesh mesh = trace_preimage(map, plane, {p1, p2}, R);
      const TopologyReport topo = mesh_topology(mesh);
      const int c1 = topo.vertex_component[static_cast<std::size_t>(*mesh.marked_vertex("p1"))];
      const int c2 = topo.vertex_component[static_cast<std::size_t>(*mesh.marked_vertex("p2"))];
      if (c1 != c2) {
        result.verdict = Connectivity::DisconnectedEvidence;
        result.note = "p1 and p2 lie on different traced components inside the ball of radius " + std::to_string(R);
      }
    } catch (const Error& e) {
      result.note += std::string("; trace for disconnection evidence failed: ") + e.what();
    }
  }
  return result;
}

}  // namespace invertlab
