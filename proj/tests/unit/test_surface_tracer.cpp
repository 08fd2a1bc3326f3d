#include <doctest.h>

#include <invertlab/fiber.hpp>
#include <invertlab/mesh_builders.hpp>
#include <invertlab/tracer.hpp>

#include "marching.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace invertlab;

namespace {

Point P(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Point braun_point(int k) { return P({0.5 * std::log(5.0), std::atan2(1.0, 2.0) + 2.0 * M_PI * k, 0.0}); }

std::vector<Point> braun_fiber() { return {braun_point(-1), braun_point(0), braun_point(1)}; }

// (w - 2.5)^2 on the first two coordinates, identity on the third.
MapSpec shifted_square() {
  RealPolynomial f0(3, {{{2, 0, 0}, 1.0}, {{1, 0, 0}, -5.0}, {{0, 0, 0}, 6.25}, {{0, 2, 0}, -1.0}});
  RealPolynomial f1(3, {{{1, 1, 0}, 2.0}, {{0, 1, 0}, -5.0}});
  RealPolynomial f2(3, {{{0, 0, 1}, 1.0}});
  return MapSpec::polynomial("shifted_square", {f0, f1, f2});
}

void check_mesh_invariants(const SurfaceMesh& m, double tol = 1e-8) {
  CHECK(m.max_residual() <= tol);
  CHECK(m.min_angle_deg() >= 15.0);
  CHECK(m.non_manifold_edges() == 0);
  const auto topo = mesh_topology(m);
  for (const auto& c : topo.components) {
    REQUIRE(c.genus.has_value());
    CHECK(*c.genus >= 0);
    CHECK(c.euler_characteristic == 2 - 2 * *c.genus - static_cast<long>(c.boundary_loops));
  }
}

}  // namespace

TEST_CASE("Plane bases are orthonormal") {
  Matrix span(4, 2);
  span << 1, 1, 2, 0, 0, 1, -1, 3;
  const Plane p = Plane::from_span(P({1, 2, 3, 4}), span);
  CHECK(p.gram_error() <= 1e-12);
  CHECK(p.contains(P({1, 2, 3, 4}) + span.col(0), 1e-12));
  Matrix normals(4, 2);
  normals << 1, 0, 0, 1, 1, 0, 0, 1;
  const Plane q = Plane::from_normals(Point::Zero(4), normals);
  CHECK(q.gram_error() <= 1e-12);
  CHECK((q.tangent.transpose() * normals).norm() <= 1e-12);
  CHECK(Plane::coordinate(Point::Zero(3), 0, 1).gram_error() <= 1e-15);
}

TEST_CASE("synthetic topology oracles") {
  SUBCASE("disc") {
    const auto t = mesh_topology(flat_disc(1.0, 0.1));
    REQUIRE(t.component_count() == 1);
    CHECK(t.components[0].euler_characteristic == 1);
    CHECK(t.components[0].boundary_loops == 1);
    CHECK(t.components[0].genus == 0);
  }
  SUBCASE("annulus") {
    const auto t = mesh_topology(flat_annulus(0.5, 1.0, 32));
    REQUIRE(t.component_count() == 1);
    CHECK(t.components[0].euler_characteristic == 0);
    CHECK(t.components[0].boundary_loops == 2);
    CHECK(t.components[0].genus == 0);
  }
  SUBCASE("one-holed torus") {
    const auto t = mesh_topology(one_holed_torus(12, 8));
    REQUIRE(t.component_count() == 1);
    CHECK(t.components[0].euler_characteristic == -1);
    CHECK(t.components[0].boundary_loops == 1);
    CHECK(t.components[0].genus == 1);
  }
  SUBCASE("boundary loops keep the surface on their left") {
    const SurfaceMesh d = flat_disc(1.0, 0.2);
    REQUIRE(d.boundary_loops().size() == 1);
    const auto& loop = d.boundary_loops()[0];
    double area = 0.0;
    for (std::size_t i = 0; i < loop.size(); ++i) {
      const Point& a = d.vertex(loop[i]);
      const Point& b = d.vertex(loop[(i + 1) % loop.size()]);
      area += a[0] * b[1] - a[1] * b[0];
    }
    CHECK(area > 0.0);
  }
}

TEST_CASE("refine preserves topology") {
  SUBCASE("disc") {
    const SurfaceMesh d = flat_disc(1.0, 0.2);
    const SurfaceMesh r = refine(d);
    CHECK(mesh_topology(r).euler_characteristic() == 1);
    CHECK(r.triangle_count() == 4 * d.triangle_count());
    // boundary midpoints snap to the circle
    for (int v : r.boundary_loops()[0]) CHECK(r.vertex(v).norm() == doctest::Approx(1.0));
  }
  SUBCASE("annulus") {
    const SurfaceMesh r = refine(flat_annulus(0.25, 1.0, 24), 4);
    CHECK(mesh_topology(r).boundary_loop_count() == 2);
  }
  SUBCASE("factor must be a power of two") { CHECK_THROWS_AS(refine(flat_disc(1.0, 0.5), 3), PreconditionError); }
}

TEST_CASE("OFF round trip") {
  const SurfaceMesh d = embed_in_plane(flat_disc(1.0, 0.25), Plane::coordinate(Point::Zero(4), 1, 3));
  std::stringstream s;
  write_off(d, s);
  const SurfaceMesh back = read_off(s);
  CHECK(back.dimension() == 4);
  CHECK(back.vertex_count() == d.vertex_count());
  CHECK(back.triangles() == d.triangles());
  for (std::size_t i = 0; i < d.vertex_count(); ++i) {
    CHECK((back.vertex(static_cast<int>(i)) - d.vertex(static_cast<int>(i))).norm() == 0.0);
  }
  const auto side = mesh_sidecar(d);
  CHECK(side["dimension"] == 4);
}

TEST_CASE("trace identity3 plane") {
  const MapSpec f = MapSpec::builtin("identity3");
  const Plane pl = Plane::coordinate(Point::Zero(3), 0, 1);
  const SurfaceMesh m = trace_preimage(f, pl, {Point::Zero(3)}, 5.0);
  check_mesh_invariants(m);
  const auto t = mesh_topology(m);
  REQUIRE(t.component_count() == 1);
  CHECK(t.euler_characteristic() == 1);
  CHECK(t.boundary_loop_count() == 1);
  for (const auto& v : m.vertices()) {
    CHECK(std::abs(v[2]) <= 1e-12);
    CHECK(v.norm() <= 5.0 + 1e-12);
  }
  // the clipped disc reaches the truncation sphere
  double rmax = 0.0;
  for (const auto& v : m.vertices()) rmax = std::max(rmax, v.norm());
  CHECK(rmax >= 5.0 - 2.0 * 5.0 / 64.0);
  REQUIRE(m.marked_vertex("p1").has_value());
  CHECK(m.vertex(*m.marked_vertex("p1")).norm() == 0.0);
}

TEST_CASE("trace braun3d on {w3 = 0}") {
  const MapSpec f = MapSpec::builtin("braun3d");
  const Plane pl = Plane::coordinate(P({2, 1, 0}), 0, 1);
  const SurfaceMesh m = trace_preimage(f, pl, braun_fiber(), 12.0);
  check_mesh_invariants(m);
  const auto t = mesh_topology(m);
  CHECK(t.component_count() == 1);
  CHECK(t.euler_characteristic() == 1);
  for (const auto& v : m.vertices()) CHECK(std::abs(v[2]) <= 1e-8);
  for (const char* l : {"p1", "p2", "p3"}) {
    REQUIRE(m.marked_vertex(l).has_value());
  }
  for (const auto& [label, comp] : t.marked_components) CHECK(comp == 0);
}

TEST_CASE("trace braun3d on {w1 = 2} agrees with the grid oracle") {
  const MapSpec f = MapSpec::builtin("braun3d");
  Matrix normal = Matrix::Zero(3, 1);
  normal(0, 0) = 1.0;
  const Plane pl = Plane::from_normals(P({2, 1, 0}), normal);
  const double R = 8.0;
  const SurfaceMesh traced = trace_preimage(f, pl, braun_fiber(), R);
  check_mesh_invariants(traced);
  const auto tt = mesh_topology(traced);

  const SurfaceMesh grid = clip_to_ball(
      testing::march_zero_set([&](const Eigen::Vector3d& x) { return f.evaluate(x)[0] - 2.0; }, R, 64), R);
  const auto gt = mesh_topology(grid);

  // compare the components that carry the seeds
  std::set<int> grid_comps;
  for (const auto& p : braun_fiber()) {
    const int v = grid.nearest_vertex(p);
    CHECK((grid.vertex(v) - p).norm() <= 0.3);
    grid_comps.insert(gt.vertex_component[static_cast<std::size_t>(v)]);
  }
  std::size_t grid_loops = 0;
  for (int c : grid_comps) grid_loops += gt.components[static_cast<std::size_t>(c)].boundary_loops;
  CHECK(tt.component_count() == grid_comps.size());
  CHECK(tt.boundary_loop_count() == grid_loops);
  MESSAGE("grid components " << gt.component_count() << ", traced " << tt.component_count());

  SUBCASE("refine keeps the component count") {
    const SurfaceMesh r = refine(traced);
    CHECK(mesh_topology(r).component_count() == tt.component_count());
    CHECK(r.max_residual() <= 1e-8);
  }
}

TEST_CASE("trace preconditions") {
  const MapSpec f = MapSpec::builtin("identity3");
  const Plane pl = Plane::coordinate(Point::Zero(3), 0, 1);
  CHECK_THROWS_AS(trace_preimage(f, pl, {P({0, 0, 1})}, 5.0), PreconditionError);
  CHECK_THROWS_AS(trace_preimage(f, pl, {P({6, 0, 0})}, 5.0), PreconditionError);
  CHECK_THROWS_AS(trace_preimage(f, pl, {P({0, 0, 0}), P({0.1, 0, 0})}, 5.0), PreconditionError);
  CHECK_THROWS_AS(trace_preimage(f, pl, {}, 5.0), PreconditionError);
}

TEST_CASE("mark_condenser_boundaries") {
  SUBCASE("unit circle rim around a single point") {
    const MapSpec f = MapSpec::builtin("identity3");
    const double R = 5.0, h = R / 64.0;
    const SurfaceMesh m = trace_preimage(f, Plane::coordinate(Point::Zero(3), 0, 1), {Point::Zero(3)}, R);
    const CondenserDomain d = mark_condenser_boundaries(m, f, Point::Zero(3), {Point::Zero(3)}, 1.0);
    REQUIRE(d.rims.size() == 1);
    CHECK(d.rims[0].size() >= 6);
    for (int v : d.rims[0]) {
      CHECK(d.mesh.vertex(v).norm() >= 1.0);
      CHECK(d.mesh.vertex(v).norm() <= 1.0 + 1.5 * h);
    }
    CHECK(mesh_topology(d.mesh).boundary_loop_count() == 2);
  }
  const MapSpec g = shifted_square();
  const Point q = P({6.25, 0, 0});
  const SurfaceMesh disc = embed_in_plane(flat_disc(10.0, 0.25), Plane::coordinate(Point::Zero(3), 0, 1));
  SUBCASE("two disjoint rims") {
    const CondenserDomain d = mark_condenser_boundaries(disc, g, q, {P({0, 0, 0}), P({5, 0, 0})}, 1.0);
    REQUIRE(d.rims.size() == 2);
    std::set<int> a(d.rims[0].begin(), d.rims[0].end());
    for (int v : d.rims[1]) CHECK(a.count(v) == 0);
    for (int v : d.rims[0]) CHECK(d.mesh.vertex(v).norm() < 2.5);
    for (int v : d.rims[1]) CHECK((d.mesh.vertex(v) - P({5, 0, 0})).norm() < 2.5);
    CHECK(mesh_topology(d.mesh).boundary_loop_count() == 3);
  }
  SUBCASE("overlapping patches") {
    CHECK_THROWS_AS(mark_condenser_boundaries(disc, g, q, {P({0, 0, 0}), P({5, 0, 0})}, 10.0), PreconditionError);
  }
  SUBCASE("patch reaching the boundary") {
    const SurfaceMesh small = embed_in_plane(flat_disc(1.0, 0.25), Plane::coordinate(Point::Zero(3), 0, 1));
    CHECK_THROWS_AS(mark_condenser_boundaries(small, MapSpec::builtin("identity3"), Point::Zero(3),
                                              {Point::Zero(3)}, 2.0),
                    PreconditionError);
  }
  SUBCASE("fiber point not a vertex") {
    CHECK_THROWS_AS(mark_condenser_boundaries(disc, g, q, {P({0.1, 0.05, 0})}, 1.0), PreconditionError);
  }
}
