#pragma once

#include "invertlab/map_catalog.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace invertlab {

struct NewtonOptions {
  double tol = 1e-10;
  int max_iterations = 100;
  /// Iterates leaving this box count as divergence.
  std::optional<Box> escape_box;
};

struct NewtonResult {
  Point x;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Damped Newton on 1/2 ||F(x) - q||^2 with Armijo backtracking.
NewtonResult damped_newton(const MapSpec& map, const Point& q, Point x0, const NewtonOptions& options);

struct FiberOptions {
  std::size_t n_starts = 512;
  double tol = 1e-10;
  /// Defaults to 1e-6 * diam(box).
  std::optional<double> dedup_radius;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  unsigned jobs = 1;
};

struct FiberPoint {
  Point x;
  double residual = 0.0;
};

struct FiberReport {
  Point target;
  Box box;
  std::vector<FiberPoint> points;  // sorted lexicographically
  double dedup_radius = 0.0;
  double tol = 0.0;
  std::size_t n_starts = 0;
  std::size_t converged = 0;
  std::size_t diverged = 0;
  /// Converged starts whose limit fell outside the box.
  std::size_t outside_box = 0;
  std::uint64_t seed = 0;
};

/// Multistart damped Newton for F^{-1}(q) inside `box`. Starts are a Sobol
/// sequence whose first N points are a prefix of the first 2N, so more starts
/// never lose a point. Deterministic for a fixed seed.
FiberReport enumerate_fiber(const MapSpec& map, const Point& q, const Box& box, const FiberOptions& options = {});

/// With `map`, every point also carries det DF and the 2-norm condition
/// number of DF there.
nlohmann::json to_json(const FiberReport& r, const MapSpec* map = nullptr);

enum class LiftStatus { Complete, EscapedBox, StepFailure };
std::string_view to_string(LiftStatus s);

struct LiftOptions {
  /// Largest predictor step, measured in the target.
  double step = 0.05;
  double tol = 1e-10;
  double min_step = 1e-9;
  std::optional<Box> box;
  /// Jacobians with reciprocal condition number below this are singular.
  double singular_rcond = 1e-13;
};

struct LiftedPath {
  std::vector<Point> target_nodes;
  std::vector<Point> lifted_nodes;
  LiftStatus status = LiftStatus::StepFailure;
  std::optional<Point> failure_location;
  std::string message;

  bool complete() const { return status == LiftStatus::Complete; }
  const Point& end() const { return lifted_nodes.back(); }
};

/// Lifts the target polyline through F starting at `start` (which must map
/// to the first vertex) by tangent prediction and Newton correction.
LiftedPath lift_path(const MapSpec& map, const Point& start, const std::vector<Point>& target_path,
                     const LiftOptions& options = {});

/// Affine subspace base + span(columns of basis), basis orthonormal.
struct AffineSubspace {
  Point base;
  Matrix basis;

  int dimension() const { return static_cast<int>(basis.cols()); }
  bool contains(const Point& y, double tol) const;
};

enum class Connectivity { Connected, NotFound, DisconnectedEvidence };
std::string_view to_string(Connectivity c);

struct ComponentQueryOptions {
  std::size_t budget = 64;
  std::uint64_t seed = 0;
  LiftOptions lift;
  /// Waypoints are drawn in a ball of this radius around F(p1) inside the
  /// subspace; defaults to 2 (1 + ||F(p1) - base||).
  std::optional<double> waypoint_radius;
  /// When the subspace is a plane in R^n (n >= 3), trace both preimage
  /// components in this ball to look for disconnection evidence.
  std::optional<double> trace_radius;
  double match_tol = 1e-6;
};

struct ComponentQuery {
  Connectivity verdict = Connectivity::NotFound;
  /// Verified lifted path from p1 to p2 when connected.
  std::optional<LiftedPath> witness;
  std::size_t attempts = 0;
  std::string note;
};

/// Looks for a path joining p1 and p2 inside F^{-1}(subspace) by lifting
/// target polylines (straight, then random loops through waypoints) from p1.
/// Never reports disconnection from search failure alone.
ComponentQuery same_component(const MapSpec& map, const AffineSubspace& subspace, const Point& p1,
                              const Point& p2, const ComponentQueryOptions& options = {});

}  // namespace invertlab
