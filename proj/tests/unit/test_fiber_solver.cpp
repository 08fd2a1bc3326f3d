#include <doctest.h>

#include <invertlab/fiber.hpp>

#include <cmath>
#include <set>

using namespace invertlab;

namespace {

Point P(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Point braun_point(int k) { return P({0.5 * std::log(5.0), std::atan2(1.0, 2.0) + 2.0 * M_PI * k, 0.0}); }

std::vector<Point> circle(double r, int n, double turns = 1.0) {
  std::vector<Point> out;
  for (int k = 0; k <= n; ++k) {
    const double t = 2.0 * M_PI * turns * k / n;
    out.push_back(P({r * std::cos(t), r * std::sin(t)}));
  }
  return out;
}

}  // namespace

TEST_CASE("braun3d fiber of (2,1,0)") {
  const MapSpec f = MapSpec::builtin("braun3d");
  const auto r = enumerate_fiber(f, P({2, 1, 0}), Box::centered(3, 10.0));
  REQUIRE(r.points.size() == 3);
  for (int k = -1; k <= 1; ++k) {
    double best = 1e9;
    for (const auto& p : r.points) best = std::min(best, (p.x - braun_point(k)).norm());
    CHECK(best <= 1e-8);
  }
  for (const auto& p : r.points) CHECK(p.residual <= 1e-10);
}

TEST_CASE("identity3 fiber is a single point") {
  const auto r = enumerate_fiber(MapSpec::builtin("identity3"), P({1, 2, 3}), Box::centered(3, 10.0));
  REQUIRE(r.points.size() == 1);
  CHECK((r.points[0].x - P({1, 2, 3})).norm() <= 1e-10);
}

TEST_CASE("exp_c2 fiber of (1,0,1,0) with |y1| <= 7") {
  Point lo = P({-5, -7, -5, -5}), hi = P({5, 7, 5, 5});
  const auto r = enumerate_fiber(MapSpec::builtin("exp_c2"), P({1, 0, 1, 0}), Box(lo, hi));
  REQUIRE(r.points.size() == 3);
  std::set<int> ks;
  for (const auto& p : r.points) {
    const int k = static_cast<int>(std::lround(p.x[1] / (2.0 * M_PI)));
    ks.insert(k);
    CHECK((p.x - P({0, 2.0 * M_PI * k, 1, 0})).norm() <= 1e-8);
  }
  CHECK(ks == std::set<int>{-1, 0, 1});
}

TEST_CASE("fiber invariants") {
  const MapSpec f = MapSpec::builtin("braun3d");
  FiberOptions o;
  o.seed = 9;
  o.n_starts = 256;
  const auto a = enumerate_fiber(f, P({2, 1, 0}), Box::centered(3, 10.0), o);
  SUBCASE("deterministic") {
    const auto b = enumerate_fiber(f, P({2, 1, 0}), Box::centered(3, 10.0), o);
    REQUIRE(a.points.size() == b.points.size());
    for (std::size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].x == b.points[i].x);
  }
  SUBCASE("sound and separated") {
    for (std::size_t i = 0; i < a.points.size(); ++i) {
      CHECK((f.evaluate(a.points[i].x) - P({2, 1, 0})).norm() <= 1e-10);
      for (std::size_t j = 0; j < i; ++j) CHECK((a.points[i].x - a.points[j].x).norm() >= a.dedup_radius);
    }
  }
  SUBCASE("monotone recall") {
    FiberOptions more = o;
    more.n_starts = 512;
    const auto b = enumerate_fiber(f, P({2, 1, 0}), Box::centered(3, 10.0), more);
    for (const auto& p : a.points) {
      double best = 1e9;
      for (const auto& q : b.points) best = std::min(best, (p.x - q.x).norm());
      CHECK(best <= a.dedup_radius);
    }
  }
  SUBCASE("tallies add up") { CHECK(a.converged + a.diverged == a.n_starts); }
}

TEST_CASE("lift_path") {
  SUBCASE("identity lift is the path") {
    const MapSpec f = MapSpec::builtin("identity2");
    const auto path = circle(1.0, 16);
    const auto lift = lift_path(f, path.front(), path);
    REQUIRE(lift.complete());
    for (std::size_t i = 0; i < lift.lifted_nodes.size(); ++i) {
      CHECK((lift.lifted_nodes[i] - lift.target_nodes[i]).norm() <= 1e-10);
    }
  }
  SUBCASE("unit circle through z^2 ends at (-1, 0)") {
    const auto lift = lift_path(MapSpec::builtin("square_c1"), P({1, 0}), circle(1.0, 64));
    REQUIRE(lift.complete());
    CHECK((lift.end() - P({-1, 0})).norm() <= 1e-8);
  }
  SUBCASE("braun segment stays on the k = 0 sheet") {
    const MapSpec f = MapSpec::builtin("braun3d");
    const auto lift = lift_path(f, braun_point(0), {P({2, 1, 0}), P({3, 1, 0})});
    REQUIRE(lift.complete());
    CHECK((lift.end() - P({0.5 * std::log(10.0), std::atan2(1.0, 3.0), 0.0})).norm() <= 1e-8);
    for (const auto& x : lift.lifted_nodes) {
      CHECK(std::abs(x[2]) <= 1e-10);
      CHECK(std::abs(x[1]) < 0.5);
    }
  }
  SUBCASE("pushing the lift forward reproduces the path") {
    const MapSpec f = MapSpec::builtin("exp_c2");
    const Point x0 = P({0.1, 0.2, 0.3, -0.4});
    const Point y0 = f.evaluate(x0);
    std::vector<Point> path{y0, y0 + P({1, 0.5, -0.5, 0.2}), y0 + P({0, 1, 0.5, 0})};
    const auto lift = lift_path(f, x0, path);
    REQUIRE(lift.complete());
    for (std::size_t i = 0; i < lift.lifted_nodes.size(); ++i) {
      CHECK((f.evaluate(lift.lifted_nodes[i]) - lift.target_nodes[i]).norm() <= 1e-9);
    }
  }
  SUBCASE("through the critical point of z^2 the lift fails with a location") {
    const auto lift = lift_path(MapSpec::builtin("square_c1"), P({1, 0}), {P({1, 0}), P({-1, 0})});
    CHECK_FALSE(lift.complete());
    REQUIRE(lift.failure_location.has_value());
    CHECK(lift.failure_location->norm() <= 0.1);
  }
  SUBCASE("leaving the box") {
    LiftOptions o;
    o.box = Box::centered(3, 2.0);
    const auto lift = lift_path(MapSpec::builtin("identity3"), P({0, 0, 0}), {P({0, 0, 0}), P({5, 0, 0})}, o);
    CHECK(lift.status == LiftStatus::EscapedBox);
  }
  SUBCASE("start off the fiber is rejected") {
    CHECK_THROWS_AS(lift_path(MapSpec::builtin("identity2"), P({0, 0}), {P({1, 0})}), PreconditionError);
  }
}

TEST_CASE("same_component") {
  SUBCASE("braun plane w3 = 0 joins the k = 0 and k = 1 points") {
    const MapSpec f = MapSpec::builtin("braun3d");
    AffineSubspace s{P({0, 0, 0}), Matrix::Identity(3, 2)};
    const auto r = same_component(f, s, braun_point(0), braun_point(1));
    REQUIRE(r.verdict == Connectivity::Connected);
    REQUIRE(r.witness.has_value());
    for (std::size_t i = 0; i < r.witness->lifted_nodes.size(); ++i) {
      CHECK(s.contains(f.evaluate(r.witness->lifted_nodes[i]), 1e-8));
    }
    CHECK((r.witness->end() - braun_point(1)).norm() <= 1e-6);
  }
  SUBCASE("identity with p1 = p2") {
    AffineSubspace s{P({0, 0, 0}), Matrix::Identity(3, 1)};
    const auto r = same_component(MapSpec::builtin("identity3"), s, P({0.5, 0, 0}), P({0.5, 0, 0}));
    CHECK(r.verdict == Connectivity::Connected);
  }
  SUBCASE("z^2 on the line v = 0 never claims connection") {
    AffineSubspace s{P({0, 0}), Matrix::Identity(2, 1)};
    const auto r = same_component(MapSpec::builtin("square_c1"), s, P({1, 0}), P({-1, 0}));
    CHECK(r.verdict == Connectivity::NotFound);
    CHECK_FALSE(r.witness.has_value());
    CHECK(r.attempts > 1);
  }
  SUBCASE("points off the subspace preimage are rejected") {
    AffineSubspace s{P({0, 0, 5}), Matrix::Identity(3, 2)};
    CHECK_THROWS_AS(same_component(MapSpec::builtin("identity3"), s, P({0, 0, 0}), P({1, 0, 0})), PreconditionError);
  }
}
