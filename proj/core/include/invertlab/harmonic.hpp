#pragma once

#include "invertlab/surface_mesh.hpp"

#include <Eigen/SparseCore>

#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace invertlab {

/// Cotangent stiffness matrix L with L_ij = -w_ij, L_ii = sum_j w_ij and
/// w_ij = (cot alpha_ij + cot beta_ij) / 2, angles measured in the ambient
/// embedding. u^T L u = sum over edges of w_ij (u_i - u_j)^2.
struct DiscreteLaplacian {
  Eigen::SparseMatrix<double> stiffness;
  /// Edges whose total weight is negative (obtuse opposite angles).
  std::size_t negative_weights = 0;

  static DiscreteLaplacian assemble(const SurfaceMesh& mesh);
  double energy(const Eigen::VectorXd& u) const { return u.dot(stiffness * u); }
};

struct HarmonicField {
  std::shared_ptr<const SurfaceMesh> mesh;
  Eigen::VectorXd values;
  /// Dirichlet vertices and their prescribed values; every other vertex is
  /// free (natural Neumann condition on unconstrained boundary loops).
  std::vector<int> constrained;
  std::vector<double> constrained_values;
  std::string boundary_description;
  /// Per-face gradient, tangent to the face.
  std::vector<Point> face_gradients;
  /// Dirichlet energy sum_edges w_ij (u_i - u_j)^2.
  double energy = 0.0;
  double relative_residual = 0.0;
  std::size_t negative_weights = 0;
  std::string solver;

  double value(int v) const { return values[v]; }
  /// Amount by which u leaves [min, max] of its constrained values (0 when
  /// the discrete maximum principle holds).
  double max_principle_violation() const;
};

/// Harmonic extension of Dirichlet data. Throws PreconditionError for bad
/// vertex lists and NumericalError when the system is singular (a free
/// region with no constrained vertex) or the solve misses 1e-10.
HarmonicField solve_dirichlet(const SurfaceMesh& mesh, const std::vector<int>& vertices,
                              const std::vector<double>& values, std::string description = "dirichlet");

/// u = 0 on T1, u = 1 on T2 (values overridable for tests), harmonic inside.
HarmonicField solve_condenser(const SurfaceMesh& mesh, const std::vector<int>& t1, const std::vector<int>& t2,
                              double value1 = 0.0, double value2 = 1.0);

/// Area-weighted mean of the incident face gradients. Throws
/// PreconditionError for boundary vertices.
Point gradient_at(const HarmonicField& field, int vertex);

/// Dirichlet energy of a condenser field.
double capacity(const HarmonicField& field);

/// One mesh of an exhaustion: `inner` is the loop T, every other boundary
/// loop is the outer truncation boundary.
struct ExhaustionLevel {
  SurfaceMesh mesh;
  std::vector<int> inner;
  /// Marked vertex b (log-normalised solves only).
  int b = -1;
  double radius = 0.0;
};

struct LogNormalizedLevel {
  double radius = 0.0;
  double raw_value_at_b = 0.0;  // u_R(b) before rescaling
  double capacity = 0.0;
  Point gradient_at_b;          // of the rescaled field
  /// ||grad u~_R(b) - grad u~_{R_prev}(b)||; 0 for the first level.
  double cauchy_difference = 0.0;
};

struct LogNormalizedResult {
  HarmonicField field;  // rescaled, on the largest mesh
  std::vector<LogNormalizedLevel> levels;
};

/// For each level: u_R = 0 on T, 1 on the outer loops, then u~ = u_R / u_R(b).
/// Throws NumericalError when u_R(b) < 1e-12.
LogNormalizedResult solve_log_normalized(const std::vector<ExhaustionLevel>& levels);

enum class ConformalVerdict { Parabolic, Hyperbolic, Inconclusive };
std::string_view to_string(ConformalVerdict v);

struct ConformalThresholds {
  /// Parabolic when the extrapolated capacity is below this.
  double parabolic_max = 0.15;
  /// Hyperbolic when capacities stay at or above this ...
  double hyperbolic_min = 0.5;
  /// ... with relative change at most this across the last two radii.
  double plateau_change = 0.02;
  /// Slack for the monotonicity check.
  double monotone_slack = 0.02;
};

struct ConformalTypeReport {
  std::vector<double> radii;
  std::vector<double> capacities;
  std::vector<double> moduli;  // 1 / capacity
  /// Least-squares slope of 1/capacity against ln R.
  double modulus_slope = 0.0;
  /// Limit of the modulus assuming geometrically decaying increments;
  /// infinite when increments do not decay.
  double extrapolated_modulus = std::numeric_limits<double>::infinity();
  double extrapolated_capacity = 0.0;
  bool monotone = true;
  ConformalVerdict verdict = ConformalVerdict::Inconclusive;
  ConformalThresholds thresholds;
};

/// Condenser capacities along an exhaustion (radii strictly increasing,
/// at least three levels) and the parabolic / hyperbolic verdict.
ConformalTypeReport conformal_type(const std::vector<ExhaustionLevel>& levels,
                                   const ConformalThresholds& thresholds = {});
/// Same classification from precomputed capacities.
ConformalTypeReport classify_capacities(const std::vector<double>& radii, const std::vector<double>& capacities,
                                        const ConformalThresholds& thresholds = {});

nlohmann::json to_json(const ConformalTypeReport& r);

/// Boundary loops of `mesh` other than the one equal (as a vertex set) to `inner`.
std::vector<int> outer_boundary_vertices(const SurfaceMesh& mesh, const std::vector<int>& inner);

}  // namespace invertlab
