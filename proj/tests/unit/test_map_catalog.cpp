#include <doctest.h>

#include <invertlab/map_catalog.hpp>

#include <cmath>
#include <random>

using namespace invertlab;

namespace {

Point P(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Point random_point(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Point p(n);
  for (int i = 0; i < n; ++i) p[i] = u(rng);
  return p;
}

}  // namespace

TEST_CASE("braun3d at the origin and its Jacobian") {
  const MapSpec f = MapSpec::builtin("braun3d");
  CHECK(f.dimension() == 3);
  CHECK((f.evaluate(P({0, 0, 0})) - P({1, 0, 0})).norm() == doctest::Approx(0.0));
  CHECK((f.jacobian_matrix(P({0, 0, 0})) - Matrix::Identity(3, 3)).norm() == doctest::Approx(0.0));
}

TEST_CASE("cubic_shear evaluates (x + y^3, y)") {
  const MapSpec f = MapSpec::builtin("cubic_shear");
  CHECK((f.evaluate(P({2, 1})) - P({3, 1})).norm() == doctest::Approx(0.0));
  const Matrix j = f.jacobian_matrix(P({0.5, 2.0}));
  CHECK(j(0, 1) == doctest::Approx(12.0));
  CHECK(j(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("identity maps") {
  const MapSpec f = MapSpec::builtin("identity4");
  CHECK(f.dimension() == 4);
  const Point x = P({1, -2, 3, 0.5});
  CHECK((f.evaluate(x) - x).norm() == 0.0);
  CHECK_THROWS_AS(MapSpec::builtin("identity0"), ConfigError);
  CHECK_THROWS_AS(MapSpec::builtin("nope"), ConfigError);
}

TEST_CASE("exp_c2 has the expected components and unit Jacobian determinant") {
  const MapSpec f = MapSpec::builtin("exp_c2");
  const Point x = P({0.3, -1.1, 0.7, 0.2});
  const Point y = f.evaluate(x);
  const std::complex<double> z1(0.3, -1.1), z2(0.7, 0.2);
  const std::complex<double> w1 = std::exp(z1), w2 = z2 * std::exp(-z1);
  CHECK(y[0] == doctest::Approx(w1.real()).epsilon(1e-14));
  CHECK(y[1] == doctest::Approx(w1.imag()).epsilon(1e-14));
  CHECK(y[2] == doctest::Approx(w2.real()).epsilon(1e-14));
  CHECK(y[3] == doctest::Approx(w2.imag()).epsilon(1e-14));
  CHECK(f.jacobian(x).det == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exact Jacobians agree with central finite differences") {
  std::mt19937_64 rng(7);
  for (const char* name : {"braun3d", "exp_c2", "cubic_shear", "square_c1", "identity3"}) {
    const MapSpec f = MapSpec::builtin(name);
    for (int k = 0; k < 100; ++k) {
      const Point x = random_point(rng, f.dimension(), 1.5);
      const Matrix j = f.jacobian_matrix(x);
      const Matrix fd = finite_difference_jacobian(f, x, 1e-5);
      const double inf_norm = j.cwiseAbs().rowwise().sum().maxCoeff();
      CHECK((j - fd).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + inf_norm));
    }
  }
}

TEST_CASE("braun3d determinant is e^{2x}") {
  const MapSpec f = MapSpec::builtin("braun3d");
  std::mt19937_64 rng(11);
  for (int k = 0; k < 100; ++k) {
    const Point x = random_point(rng, 3, 4.0);
    const double det = f.jacobian(x).det;
    CHECK(std::abs(det - std::exp(2.0 * x[0])) <= 1e-12 * std::exp(2.0 * x[0]));
  }
}

TEST_CASE("realified complex maps have non-negative Jacobian determinant") {
  const MapSpec f = MapSpec::builtin("square_c1");
  std::mt19937_64 rng(3);
  for (int k = 0; k < 100; ++k) {
    const Point x = random_point(rng, 2, 2.0);
    CHECK(f.jacobian(x).det == doctest::Approx(4.0 * x.squaredNorm()).epsilon(1e-12));
    CHECK(f.jacobian(x).det >= 0.0);
  }
}

TEST_CASE("local_diffeo_scan") {
  SUBCASE("braun3d on [-3,3]^3") {
    const auto r = local_diffeo_scan(MapSpec::builtin("braun3d"), Box::centered(3, 3.0), 10000);
    CHECK(r.min_abs_det == doctest::Approx(std::exp(-6.0)).epsilon(1e-12));
    CHECK_FALSE(r.sign_change);
    CHECK_FALSE(r.flagged);
    CHECK(r.samples >= 10000);
  }
  SUBCASE("identity3") {
    const auto r = local_diffeo_scan(MapSpec::builtin("identity3"), Box::centered(3, 1.0), 1000);
    CHECK(r.min_abs_det == doctest::Approx(1.0));
    CHECK_FALSE(r.flagged);
  }
  SUBCASE("z^2 is flagged at the origin") {
    const auto r = local_diffeo_scan(MapSpec::builtin("square_c1"), Box::centered(2, 1.0), 1000);
    CHECK(r.flagged);
    CHECK(r.argmin.norm() <= 1e-3);
  }
  SUBCASE("deterministic for a fixed seed") {
    const MapSpec f = MapSpec::builtin("braun3d");
    const auto a = local_diffeo_scan(f, Box::centered(3, 2.0), 500, 42);
    const auto b = local_diffeo_scan(f, Box::centered(3, 2.0), 500, 42);
    CHECK(a.min_abs_det == b.min_abs_det);
    CHECK(a.argmin == b.argmin);
  }
}

TEST_CASE("map config parsing") {
  SUBCASE("real polynomial") {
    const MapSpec f = parse_map_config(R"([map]
name = shear
kind = polynomial-real
dimension = 2

[components]
f0 = 1 @ 1,0 + 1 @ 0,3
f1 = 1 @ 0,1
)");
    CHECK(f.name() == "shear");
    CHECK((f.evaluate(P({2, 1})) - P({3, 1})).norm() == doctest::Approx(0.0));
  }
  SUBCASE("complex polynomial is realified") {
    const MapSpec f = parse_map_config(R"([map]
name = sq
kind = polynomial-complex
dimension = 1

[components]
f0 = (1,0) @ 2
)");
    CHECK(f.dimension() == 2);
    CHECK((f.evaluate(P({1, 2})) - P({-3, 4})).norm() == doctest::Approx(0.0));
  }
  SUBCASE("malformed input names the problem") {
    CHECK_THROWS_AS(parse_map_config("[map]\nname = x\nkind = polynomial-real\ndimension = 2\n[components]\nf0 = 1 @ 1\nf1 = 1 @ 0,1\n"),
                    ConfigError);
    CHECK_THROWS_AS(parse_map_config("[map]\nname = x\nkind = what\ndimension = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_map_config("not an ini [["), ConfigError);
  }
  SUBCASE("resolve_map prefers builtin names") {
    CHECK(resolve_map("braun3d").name() == "braun3d");
    CHECK_THROWS_AS(resolve_map("/no/such/file.ini"), ConfigError);
  }
}
