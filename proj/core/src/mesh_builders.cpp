#include "invertlab/mesh_builders.hpp"

#include <algorithm>
#include <cmath>

namespace invertlab {

namespace {

struct Ring {
  std::vector<int> ids;
  std::vector<double> angles;  // ascending, within [angles[0], angles[0] + 2pi)
};

double wrap_near(double a, double ref) {
  while (a - ref > M_PI) a -= 2.0 * M_PI;
  while (a - ref <= -M_PI) a += 2.0 * M_PI;
  return a;
}

// Triangulates the band between an inner ring a and an outer ring b. A ring
// with a single vertex is a fan centre.
void stitch(const Ring& a, const Ring& b, std::vector<Triangle>& out) {
  const std::size_t m = a.ids.size(), n = b.ids.size();
  if (m == 1) {
    for (std::size_t k = 0; k < n; ++k) out.push_back({a.ids[0], b.ids[k], b.ids[(k + 1) % n]});
    return;
  }
  const double a0 = a.angles[0];
  std::size_t j0 = 0;
  double best = 1e300;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = std::abs(wrap_near(b.angles[k], a0) - a0);
    if (d < best) {
      best = d;
      j0 = k;
    }
  }
  auto alpha = [&](std::size_t i) { return i == m ? a0 + 2.0 * M_PI : a.angles[i]; };
  const double shift = wrap_near(b.angles[j0], a0) - b.angles[j0];
  auto beta = [&](std::size_t k) {
    return b.angles[(j0 + k) % n] + (j0 + k >= n ? 2.0 * M_PI : 0.0) + shift;
  };
  std::size_t i = 0, k = 0;
  while (i < m || k < n) {
    const int ai = a.ids[i % m], bk = b.ids[(j0 + k) % n];
    const bool advance_a = k == n || (i < m && alpha(i + 1) <= beta(k + 1));
    if (advance_a) {
      out.push_back({ai, bk, a.ids[(i + 1) % m]});
      ++i;
    } else {
      out.push_back({ai, bk, b.ids[(j0 + k + 1) % n]});
      ++k;
    }
  }
}

class RadialSnapProjector final : public SurfaceProjector {
 public:
  explicit RadialSnapProjector(std::vector<double> radii) : radii_(std::move(radii)) {}
  std::optional<Point> project(const Point& p, bool on_boundary) const override {
    if (!on_boundary) return p;
    const double r = p.norm();
    double target = radii_.front();
    for (double c : radii_) {
      if (std::abs(std::log(r / c)) < std::abs(std::log(r / target))) target = c;
    }
    return Point(p * (target / r));
  }
  double residual(const Point&) const override { return 0.0; }

 private:
  std::vector<double> radii_;
};

class CylinderProjector final : public SurfaceProjector {
 public:
  explicit CylinderProjector(double radius) : radius_(radius) {}
  std::optional<Point> project(const Point& p, bool) const override {
    Point q = p;
    const double r = std::hypot(p[0], p[1]);
    q[0] *= radius_ / r;
    q[1] *= radius_ / r;
    return q;
  }
  double residual(const Point& p) const override { return std::abs(std::hypot(p[0], p[1]) - radius_); }

 private:
  double radius_;
};

class TorusProjector final : public SurfaceProjector {
 public:
  TorusProjector(double major, double minor) : major_(major), minor_(minor) {}
  std::optional<Point> project(const Point& p, bool) const override {
    const double rho = std::hypot(p[0], p[1]);
    const Point c = Eigen::Vector3d(p[0] * major_ / rho, p[1] * major_ / rho, 0.0);
    const Point d = p - c;
    return Point(c + d * (minor_ / d.norm()));
  }
  double residual(const Point& p) const override {
    const double rho = std::hypot(p[0], p[1]);
    return std::abs(std::hypot(rho - major_, p[2]) - minor_);
  }

 private:
  double major_, minor_;
};

class EmbeddedProjector final : public SurfaceProjector {
 public:
  EmbeddedProjector(std::shared_ptr<const SurfaceProjector> inner, Plane plane)
      : inner_(std::move(inner)), plane_(std::move(plane)) {}
  std::optional<Point> project(const Point& p, bool on_boundary) const override {
    Point chart = plane_.tangent.transpose() * (p - plane_.base);
    if (inner_) {
      auto c = inner_->project(chart, on_boundary);
      if (!c) return std::nullopt;
      chart = *c;
    }
    return Point(plane_.base + plane_.tangent * chart);
  }
  double residual(const Point& p) const override {
    const Point d = p - plane_.base;
    return (d - plane_.tangent * (plane_.tangent.transpose() * d)).norm();
  }

 private:
  std::shared_ptr<const SurfaceProjector> inner_;
  Plane plane_;
};

int default_rings(double log_ratio, int n_theta) {
  const double d = (2.0 * M_PI / n_theta) * std::sqrt(3.0) / 2.0;
  return std::max(1, static_cast<int>(std::ceil(log_ratio / d - 1e-9)));
}

}  // namespace

SurfaceMesh flat_annulus(double inner, double outer, int n_theta, int n_rings) {
  if (!(inner > 0.0 && outer > inner)) throw PreconditionError("annulus needs 0 < inner < outer");
  if (n_theta < 3) throw PreconditionError("annulus needs n_theta >= 3");
  const double lr = std::log(outer / inner);
  if (n_rings <= 0) n_rings = default_rings(lr, n_theta);
  std::vector<Point> verts;
  std::vector<Ring> rings;
  const double dt = 2.0 * M_PI / n_theta;
  for (int k = 0; k <= n_rings; ++k) {
    const double r = k == n_rings ? outer : inner * std::exp(lr * k / n_rings);
    Ring ring;
    for (int j = 0; j < n_theta; ++j) {
      const double th = (j + 0.5 * (k % 2)) * dt;
      ring.ids.push_back(static_cast<int>(verts.size()));
      ring.angles.push_back(th);
      verts.push_back(Eigen::Vector2d(r * std::cos(th), r * std::sin(th)));
    }
    rings.push_back(std::move(ring));
  }
  std::vector<Triangle> tris;
  for (int k = 0; k < n_rings; ++k) stitch(rings[static_cast<std::size_t>(k)], rings[static_cast<std::size_t>(k + 1)], tris);
  MeshAttributes attrs;
  attrs.truncation_radius = outer;
  attrs.projector = std::make_shared<RadialSnapProjector>(std::vector<double>{inner, outer});
  return SurfaceMesh(2, std::move(verts), std::move(tris), std::move(attrs));
}

SurfaceMesh flat_annulus_uniform(double inner, double outer, double h) {
  if (!(inner > 0.0 && outer > inner && h > 0.0)) throw PreconditionError("annulus needs 0 < inner < outer and h > 0");
  const int n_rings = std::max(1, static_cast<int>(std::lround((outer - inner) / (h * std::sqrt(3.0) / 2.0))));
  std::vector<Point> verts;
  std::vector<Ring> rings;
  for (int k = 0; k <= n_rings; ++k) {
    const double r = k == n_rings ? outer : inner + (outer - inner) * k / n_rings;
    const int m = std::max(3, static_cast<int>(std::lround(2.0 * M_PI * r / h)));
    Ring ring;
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * M_PI * (j + 0.5 * (k % 2)) / m;
      ring.ids.push_back(static_cast<int>(verts.size()));
      ring.angles.push_back(th);
      verts.push_back(Eigen::Vector2d(r * std::cos(th), r * std::sin(th)));
    }
    rings.push_back(std::move(ring));
  }
  std::vector<Triangle> tris;
  for (int k = 0; k < n_rings; ++k) stitch(rings[static_cast<std::size_t>(k)], rings[static_cast<std::size_t>(k + 1)], tris);
  MeshAttributes attrs;
  attrs.truncation_radius = outer;
  attrs.projector = std::make_shared<RadialSnapProjector>(std::vector<double>{inner, outer});
  return SurfaceMesh(2, std::move(verts), std::move(tris), std::move(attrs));
}

SurfaceMesh flat_disc(double radius, double h) {
  if (!(radius > 0.0 && h > 0.0)) throw PreconditionError("disc needs positive radius and h");
  const int n_rings = std::max(1, static_cast<int>(std::lround(radius / h)));
  std::vector<Point> verts{Eigen::Vector2d(0.0, 0.0)};
  std::vector<Ring> rings{Ring{{0}, {0.0}}};
  for (int k = 1; k <= n_rings; ++k) {
    const double r = radius * k / n_rings;
    const int m = 6 * k;
    Ring ring;
    for (int j = 0; j < m; ++j) {
      const double th = 2.0 * M_PI * (j + 0.5 * (k % 2)) / m;
      ring.ids.push_back(static_cast<int>(verts.size()));
      ring.angles.push_back(th);
      verts.push_back(Eigen::Vector2d(r * std::cos(th), r * std::sin(th)));
    }
    rings.push_back(std::move(ring));
  }
  std::vector<Triangle> tris;
  for (int k = 0; k < n_rings; ++k) stitch(rings[static_cast<std::size_t>(k)], rings[static_cast<std::size_t>(k + 1)], tris);
  MeshAttributes attrs;
  attrs.truncation_radius = radius;
  attrs.projector = std::make_shared<RadialSnapProjector>(std::vector<double>{radius});
  return SurfaceMesh(2, std::move(verts), std::move(tris), std::move(attrs));
}

SurfaceMesh cylinder(double radius, double length, int n_theta) {
  if (!(radius > 0.0 && length > 0.0) || n_theta < 3) throw PreconditionError("bad cylinder parameters");
  const double dz = radius * (2.0 * M_PI / n_theta) * std::sqrt(3.0) / 2.0;
  const int n_rings = std::max(1, static_cast<int>(std::ceil(length / dz - 1e-9)));
  std::vector<Point> verts;
  std::vector<Ring> rings;
  for (int k = 0; k <= n_rings; ++k) {
    const double z = length * k / n_rings;
    Ring ring;
    for (int j = 0; j < n_theta; ++j) {
      const double th = 2.0 * M_PI * (j + 0.5 * (k % 2)) / n_theta;
      ring.ids.push_back(static_cast<int>(verts.size()));
      ring.angles.push_back(th);
      verts.push_back(Eigen::Vector3d(radius * std::cos(th), radius * std::sin(th), z));
    }
    rings.push_back(std::move(ring));
  }
  std::vector<Triangle> tris;
  for (int k = 0; k < n_rings; ++k) stitch(rings[static_cast<std::size_t>(k)], rings[static_cast<std::size_t>(k + 1)], tris);
  MeshAttributes attrs;
  attrs.projector = std::make_shared<CylinderProjector>(radius);
  return SurfaceMesh(3, std::move(verts), std::move(tris), std::move(attrs));
}

SurfaceMesh trumpet_chart(double S, int n_theta) {
  if (!(S > 0.0)) throw PreconditionError("trumpet needs S > 0");
  // Conformal coordinate t = int_0^s e^{-sigma} d sigma; the chart radius is e^t.
  return flat_annulus(1.0, std::exp(1.0 - std::exp(-S)), n_theta);
}

SurfaceMesh one_holed_torus(int m, int n, double major, double minor) {
  if (m < 3 || n < 3) throw PreconditionError("torus grid needs m, n >= 3");
  std::vector<Point> verts;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = 2.0 * M_PI * i / m, v = 2.0 * M_PI * j / n;
      verts.push_back(Eigen::Vector3d((major + minor * std::cos(v)) * std::cos(u),
                                      (major + minor * std::cos(v)) * std::sin(u), minor * std::sin(v)));
    }
  }
  auto id = [&](int i, int j) { return ((i % m) * n) + (j % n); };
  std::vector<Triangle> tris;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == 0 && j == 0) continue;  // the hole
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  MeshAttributes attrs;
  attrs.projector = std::make_shared<TorusProjector>(major, minor);
  return SurfaceMesh(3, std::move(verts), std::move(tris), std::move(attrs));
}

SurfaceMesh embed_in_plane(const SurfaceMesh& planar, const Plane& plane) {
  if (planar.dimension() != 2) throw PreconditionError("embed_in_plane needs a planar mesh");
  std::vector<Point> verts;
  verts.reserve(planar.vertex_count());
  for (const auto& v : planar.vertices()) verts.push_back(plane.base + plane.tangent * v);
  MeshAttributes attrs = planar.attributes();
  attrs.projector = std::make_shared<EmbeddedProjector>(planar.projector(), plane);
  return SurfaceMesh(plane.dimension(), std::move(verts), planar.triangles(), std::move(attrs));
}

std::vector<std::vector<int>> loops_by_radius(const SurfaceMesh& mesh, const Point& center) {
  std::vector<std::pair<double, std::vector<int>>> keyed;
  for (const auto& loop : mesh.boundary_loops()) {
    double s = 0.0;
    for (int v : loop) s += (mesh.vertex(v) - center).norm();
    keyed.emplace_back(s / static_cast<double>(loop.size()), loop);
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::vector<int>> out;
  for (auto& [r, loop] : keyed) out.push_back(std::move(loop));
  return out;
}

}  // namespace invertlab
