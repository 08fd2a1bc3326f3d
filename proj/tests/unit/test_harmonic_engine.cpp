#include <doctest.h>

#include <invertlab/harmonic.hpp>
#include <invertlab/mesh_builders.hpp>
#include <invertlab/tracer.hpp>

#include <cmath>
#include <random>

using namespace invertlab;

namespace {

struct Annulus {
  SurfaceMesh mesh;
  std::vector<int> inner, outer;
};

Annulus annulus(double a, double b, int n_theta, int n_rings = 0) {
  Annulus r{flat_annulus(a, b, n_theta, n_rings), {}, {}};
  const auto loops = loops_by_radius(r.mesh, Point::Zero(2));
  REQUIRE(loops.size() == 2);
  r.inner = loops[0];
  r.outer = loops[1];
  return r;
}

Annulus uniform_annulus(double a, double b, double h) {
  Annulus r{flat_annulus_uniform(a, b, h), {}, {}};
  const auto loops = loops_by_radius(r.mesh, Point::Zero(2));
  REQUIRE(loops.size() == 2);
  r.inner = loops[0];
  r.outer = loops[1];
  return r;
}

double exact_u(double a, double r) { return (std::log(a) - std::log(r)) / std::log(a); }

double max_nodal_error(const HarmonicField& f, double a) {
  double e = 0.0;
  for (std::size_t v = 0; v < f.mesh->vertex_count(); ++v) {
    e = std::max(e, std::abs(f.values[static_cast<Eigen::Index>(v)] - exact_u(a, f.mesh->vertex(static_cast<int>(v)).norm())));
  }
  return e;
}

// piecewise-linear value at a planar point
double interpolate(const HarmonicField& f, const Eigen::Vector2d& p) {
  const SurfaceMesh& m = *f.mesh;
  for (const Triangle& tri : m.triangles()) {
    const Eigen::Vector2d a = m.vertex(tri[0]).head<2>(), b = m.vertex(tri[1]).head<2>(), c = m.vertex(tri[2]).head<2>();
    Eigen::Matrix2d e;
    e << b - a, c - a;
    const Eigen::Vector2d l = e.inverse() * (p - a);
    if (l.minCoeff() >= -1e-12 && l.sum() <= 1.0 + 1e-12) {
      return (1.0 - l.sum()) * f.values[tri[0]] + l[0] * f.values[tri[1]] + l[1] * f.values[tri[2]];
    }
  }
  FAIL("point outside the mesh");
  return 0.0;
}

int vertex_near_radius(const SurfaceMesh& m, double r) {
  int best = -1;
  double bd = 1e300;
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    const double d = std::abs(m.vertex(static_cast<int>(v)).norm() - r);
    if (d < bd && !m.is_boundary_vertex(static_cast<int>(v))) {
      bd = d;
      best = static_cast<int>(v);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("flat annulus condenser against the closed form") {
  const double a = 0.25;
  // 33 rings put one exactly at r = 0.5.
  const Annulus an = uniform_annulus(a, 1.0, 0.026);
  const HarmonicField f = solve_condenser(an.mesh, an.inner, an.outer);
  CHECK(an.mesh.vertex_count() >= 4500);
  CHECK(an.mesh.vertex_count() <= 5500);
  CHECK(f.relative_residual <= 1e-10);

  SUBCASE("nodal values") {
    CHECK(max_nodal_error(f, a) <= 2e-2);
    CHECK(std::abs(interpolate(f, Eigen::Vector2d(0.5, 0.0)) - 0.5) <= 2e-2);
    CHECK(std::abs(interpolate(f, Eigen::Vector2d(0.0, std::pow(0.25, 0.25))) - 0.75) <= 2e-2);
  }
  SUBCASE("gradient at r = 0.5") {
    const int v = vertex_near_radius(an.mesh, 0.5);
    const Point g = gradient_at(f, v);
    const double r = an.mesh.vertex(v).norm();
    const double expected = 1.0 / (r * std::log(4.0));
    CHECK(std::abs(g.norm() - expected) <= 0.05 * expected);
    const double cosine = g.dot(an.mesh.vertex(v)) / (g.norm() * r);
    CHECK(cosine >= 0.99);
  }
  SUBCASE("error decreases under refinement") {
    const SurfaceMesh fine = refine(an.mesh);
    const auto loops = loops_by_radius(fine, Point::Zero(2));
    REQUIRE(loops.size() == 2);
    const HarmonicField fr = solve_condenser(fine, loops[0], loops[1]);
    const double coarse = max_nodal_error(f, a), refined = max_nodal_error(fr, a);
    MESSAGE("max nodal error " << coarse << " -> " << refined);
    CHECK(refined < coarse);
  }
  SUBCASE("capacity") { CHECK(capacity(f) == doctest::Approx(2.0 * M_PI / std::log(1.0 / a)).epsilon(0.02)); }
}

TEST_CASE("log-polar annulus reproduces log r at the nodes") {
  // inner and outer fans of every vertex are similar triangles
  const Annulus an = annulus(0.25, 1.0, 140, 36);
  const HarmonicField f = solve_condenser(an.mesh, an.inner, an.outer);
  CHECK(max_nodal_error(f, 0.25) <= 1e-12);
}

TEST_CASE("capacity of a wide annulus a = e^{-2 pi}") {
  const double a = std::exp(-2.0 * M_PI);
  const Annulus an = annulus(a, 1.0, 64);
  const HarmonicField f = solve_condenser(an.mesh, an.inner, an.outer);
  CHECK(capacity(f) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("harmonic properties") {
  const double a = 0.25;
  const Annulus an = annulus(a, 1.0, 48);
  const HarmonicField f = solve_condenser(an.mesh, an.inner, an.outer);

  SUBCASE("maximum principle") { CHECK(f.max_principle_violation() <= 1e-12); }
  SUBCASE("symmetry u -> 1 - u") {
    const HarmonicField g = solve_condenser(an.mesh, an.outer, an.inner);
    CHECK((f.values + g.values - Eigen::VectorXd::Ones(f.values.size())).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(g.energy == doctest::Approx(f.energy).epsilon(1e-10));
  }
  SUBCASE("linearity") {
    const HarmonicField g = solve_condenser(an.mesh, an.inner, an.outer, 2.0, -3.0);
    const Eigen::VectorXd expect = 2.0 * Eigen::VectorXd::Ones(f.values.size()) - 5.0 * f.values;
    CHECK((g.values - expect).cwiseAbs().maxCoeff() <= 1e-9);
  }
  SUBCASE("energy minimality") {
    const auto lap = DiscreteLaplacian::assemble(an.mesh);
    std::vector<bool> fixed(an.mesh.vertex_count(), false);
    for (int v : f.constrained) fixed[static_cast<std::size_t>(v)] = true;
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1e-2);
    for (int k = 0; k < 100; ++k) {
      Eigen::VectorXd u = f.values;
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        if (!fixed[static_cast<std::size_t>(i)]) u[i] += g(rng);
      }
      CHECK(lap.energy(u) >= f.energy);
    }
  }
  SUBCASE("face gradients are tangent and finite") {
    CHECK(f.face_gradients.size() == an.mesh.triangle_count());
    for (const auto& g : f.face_gradients) CHECK(g.allFinite());
  }
  SUBCASE("gradient at a boundary vertex is refused") {
    CHECK_THROWS_AS(gradient_at(f, an.inner[0]), PreconditionError);
  }
  SUBCASE("free region without constraint is singular") {
    CHECK_THROWS_AS(solve_dirichlet(an.mesh, {}, {}), Error);
  }
}

TEST_CASE("log-normalised exhaustion on the plane minus the unit disc") {
  std::vector<ExhaustionLevel> levels;
  for (int k : {2, 3, 4}) {
    const double R = std::exp(static_cast<double>(k));
    // 20 rings per unit of log r put a ring exactly at r = e.
    const Annulus an = annulus(1.0, R, 96, 20 * k);
    ExhaustionLevel lv;
    lv.mesh = an.mesh;
    lv.inner = an.inner;
    lv.b = vertex_near_radius(an.mesh, std::exp(1.0));
    lv.radius = R;
    REQUIRE(std::abs(an.mesh.vertex(lv.b).norm() - std::exp(1.0)) <= 1e-9);
    levels.push_back(std::move(lv));
  }
  const LogNormalizedResult res = solve_log_normalized(levels);
  REQUIRE(res.levels.size() == 3);
  for (const auto& lv : res.levels) {
    CHECK(lv.raw_value_at_b == doctest::Approx(1.0 / std::log(lv.radius)).epsilon(0.02));
    CHECK(std::abs(lv.gradient_at_b.norm() - std::exp(-1.0)) <= 5e-2);
  }
  // u~ at r = e^2 on the largest level
  const SurfaceMesh& m = *res.field.mesh;
  const int v = vertex_near_radius(m, std::exp(2.0));
  CHECK(std::abs(res.field.values[v] - std::log(m.vertex(v).norm())) <= 5e-2);
  CHECK(std::abs(res.field.values[v] - 2.0) <= 5e-2);
}

TEST_CASE("conformal type") {
  SUBCASE("cylinders are parabolic with modulus L / 2 pi") {
    std::vector<ExhaustionLevel> levels;
    for (double L : {10.0, 20.0, 40.0}) {
      ExhaustionLevel lv;
      lv.mesh = cylinder(1.0, L, 32);
      const auto loops = lv.mesh.boundary_loops();
      REQUIRE(loops.size() == 2);
      lv.inner = lv.mesh.vertex(loops[0][0])[2] < 1.0 ? loops[0] : loops[1];
      lv.radius = L;
      levels.push_back(std::move(lv));
    }
    const auto r = conformal_type(levels);
    for (std::size_t k = 0; k < 3; ++k) {
      const double expected = r.radii[k] / (2.0 * M_PI);
      CHECK(std::abs(r.moduli[k] - expected) <= 0.05 * expected);
    }
    CHECK(r.verdict == ConformalVerdict::Parabolic);
  }
  SUBCASE("flat annuli are parabolic with modulus ln R / 2 pi") {
    std::vector<ExhaustionLevel> levels;
    for (double R : {10.0, 100.0, 1000.0}) {
      const Annulus an = annulus(1.0, R, 48);
      levels.push_back({an.mesh, an.inner, -1, R});
    }
    const auto r = conformal_type(levels);
    for (std::size_t k = 0; k < 3; ++k) {
      const double expected = std::log(r.radii[k]) / (2.0 * M_PI);
      CHECK(std::abs(r.moduli[k] - expected) <= 0.05 * expected);
    }
    CHECK(r.verdict == ConformalVerdict::Parabolic);
  }
  SUBCASE("trumpets are hyperbolic with modulus (1 - e^{-S}) / 2 pi") {
    std::vector<ExhaustionLevel> levels;
    for (double S : {3.0, 5.0, 8.0}) {
      ExhaustionLevel lv;
      lv.mesh = trumpet_chart(S, 64);
      lv.inner = loops_by_radius(lv.mesh, Point::Zero(2))[0];
      lv.radius = S;
      levels.push_back(std::move(lv));
    }
    const auto r = conformal_type(levels);
    for (std::size_t k = 0; k < 3; ++k) {
      const double expected = (1.0 - std::exp(-r.radii[k])) / (2.0 * M_PI);
      CHECK(std::abs(r.moduli[k] - expected) <= 0.05 * expected);
    }
    CHECK(r.verdict == ConformalVerdict::Hyperbolic);
  }
  SUBCASE("too few levels") {
    CHECK_THROWS_AS(classify_capacities({1.0, 2.0}, {1.0, 0.5}), PreconditionError);
  }
  SUBCASE("non-nested radii") {
    CHECK_THROWS_AS(classify_capacities({1.0, 3.0, 2.0}, {1.0, 0.5, 0.4}), PreconditionError);
  }
  SUBCASE("flat capacities without a plateau stay inconclusive") {
    CHECK(classify_capacities({1.0, 2.0, 3.0}, {0.45, 0.42, 0.40}).verdict == ConformalVerdict::Inconclusive);
  }
}
