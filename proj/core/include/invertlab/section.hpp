#pragma once

#include "invertlab/harmonic.hpp"
#include "invertlab/plane.hpp"
#include "invertlab/tracer.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace invertlab {

enum class FamilyKind { Icosphere, Rp1, Explicit };
std::string_view to_string(FamilyKind k);

/// Planes indexed by a parameter space, with its adjacency.
struct PlaneFamily {
  FamilyKind kind = FamilyKind::Explicit;
  int level = 0;
  /// Parameter point per sample: p on S^2 (icosphere), (cos t, sin t) for rp1
  /// lines, free-form for explicit families.
  std::vector<Point> samples;
  /// Linear planes (base 0); pipelines translate them to q.
  std::vector<Plane> planes;
  /// Icosphere faces (counter-clockwise seen from outside).
  std::vector<Triangle> faces;
  /// Adjacent sample pairs.
  std::vector<std::pair<int, int>> edges;

  std::size_t size() const { return samples.size(); }
};

/// Unit icosphere of the given level (10 * 4^level + 2 samples), pi_p = p^perp
/// inside span(e1, e2, e3) of R^n. Basis convention: u1 is the normalised
/// projection of e3 onto p^perp (of e1 when |p_3| > 0.9), u2 = p x u1, both
/// computed for the antipode with positive leading nonzero coordinate, so p
/// and -p carry the identical Plane.
PlaneFamily sample_tangent_planes(int level, int n = 3);

/// Real lines l(t) = span_C(cos t, sin t) in C^2, t = k pi / count, as real
/// 2-planes of R^4 (interleaved coordinates). Cyclic adjacency.
PlaneFamily rp1_family(std::size_t count);

/// Explicit list of planes with path adjacency (k, k+1), closed when `cyclic`.
PlaneFamily explicit_family(std::vector<Plane> planes, bool cyclic = false);

enum class SampleStatus { Ok, TraceFailed, EndsNotDisc, SolverFailed };
std::string_view to_string(SampleStatus s);

struct SectionSample {
  int id = 0;
  Plane plane;  // affine plane q + pi_p actually used
  Point vector;
  SampleStatus status = SampleStatus::SolverFailed;
  std::string diagnostic;
  /// ||s - P_pi s|| / ||s|| before the final projection onto pi.
  double projection_residual = 0.0;
  /// Stage details: mesh sizes, topology, capacities, ...
  nlohmann::json details = nlohmann::json::object();
  std::optional<ConformalTypeReport> conformal;
};

struct SectionField {
  std::string construction;  // "condenser" or "log"
  std::vector<SectionSample> samples;
  nlohmann::json provenance = nlohmann::json::object();

  std::size_t ok_count() const;
  bool complete() const { return ok_count() == samples.size(); }
  /// max over ok samples of |<s, w_j>| / ||s||.
  double max_tangency_error() const;
};

struct SectionParams {
  double R = 10.0;
  /// 0 means R / 64.
  double h = 0.0;
  /// Radius of the ball W around q.
  double ball_radius = 0.5;
  /// Truncation radii of the exhaustion for the log construction (the
  /// largest is traced); default {R/2, 3R/4, R}.
  std::vector<double> exhaustion_radii;
  TraceOptions trace;
  unsigned jobs = 1;
};

/// s(p) = DF(p3) grad u_{pi_p}(p3) with the condenser u = 0 on T1, 1 on T2.
/// Needs at least three distinct fiber points of q (PreconditionError).
SectionField build_condenser_section(const MapSpec& map, const Point& q, const std::vector<Point>& fiber_points,
                                     const PlaneFamily& family, const SectionParams& params = {});

/// s(p) = DF(b) grad u~_{pi_p}(b), u~ the log-normalised exhaustion solution
/// vanishing on the rim of U around a. Needs F(a) = F(b) = q, a != b.
SectionField build_log_section(const MapSpec& map, const Point& q, const Point& a, const Point& b,
                               const PlaneFamily& family, const SectionParams& params = {});

/// Direct-mesh mode: meshes are supplied per plane instead of traced.
struct CondenserMeshSpec {
  SurfaceMesh mesh;
  std::vector<int> t1, t2;
  int p3 = -1;
};
using CondenserMeshProvider = std::function<CondenserMeshSpec(const Plane&, std::size_t sample)>;
SectionField build_condenser_section_direct(const MapSpec& map, const Point& q, const PlaneFamily& family,
                                            const CondenserMeshProvider& provider, unsigned jobs = 1);

using LogMeshProvider = std::function<std::vector<ExhaustionLevel>(const Plane&, std::size_t sample)>;
SectionField build_log_section_direct(const MapSpec& map, const Point& q, const PlaneFamily& family,
                                      const LogMeshProvider& provider, unsigned jobs = 1);

nlohmann::json to_json(const SectionField& field);

// --- topology -----------------------------------------------------------

struct ZeroCell {
  std::array<Point, 3> corners;
  int index = 0;
  int depth = 0;  // subdivision depth at which it was resolved
};

struct IndexReport {
  std::vector<ZeroCell> zeros;
  int index_sum = 0;
  int level = 0;
  /// Largest rotation of the field along a (sub)edge, radians.
  double max_edge_rotation = 0.0;
  bool resolved = true;
  std::vector<std::string> flags;
};

struct IndexOptions {
  /// Edges along which the field turns more than this are unresolved.
  double max_edge_rotation = 0.75 * M_PI;
  int max_depth = 6;
  double zero_tol = 1e-12;
};

/// Tangent field on the unit sphere: sample positions (unit vectors), one
/// vector per sample, and the triangles. When `field` is given unresolved
/// triangles are subdivided with fresh samples and zero samples are
/// perturbed; otherwise they are flagged.
IndexReport index_sum(const std::vector<Point>& positions, const std::vector<Point>& vectors,
                      const std::vector<Triangle>& faces, int level,
                      const std::function<Point(const Point&)>& field = {}, const IndexOptions& options = {});
/// Index sum of a section over an icosphere family (vectors are mapped to
/// T_p S^2 through the first three coordinates). Incomplete sections are
/// flagged and never summed.
IndexReport index_sum(const SectionField& section, const PlaneFamily& family, const IndexOptions& options = {});

/// Winding number around 0 of f on the circle |z - center| = radius by
/// accumulated argument over `samples` points.
int winding_number(const std::function<std::complex<double>(std::complex<double>)>& f,
                   std::complex<double> center, double radius, int samples);

/// Euler number of the tautological bundle over CP^1 from the section
/// xi(alpha) = (1, alpha) in the chart zeta = 1 / alpha.
int tautological_euler(int samples = 256);

struct Rp1Sample {
  /// Real vector spanning the line (as a complex vector).
  Eigen::VectorXcd line;
  Eigen::VectorXcd section;
};

struct Rp1ParityReport {
  int sign_changes = 0;
  bool odd = false;
  bool holonomy_flip = false;
  /// Adjacent sample pairs (k, k+1 mod N) between which a zero lies.
  std::vector<std::pair<int, int>> zero_intervals;
  /// Samples where the section itself vanishes.
  std::vector<int> zero_samples;
  std::vector<double> coefficients;
};

/// Möbius parity along the cyclically ordered samples. Throws
/// PreconditionError when a line or section is not real within 1e-8 or the
/// section leaves its line.
Rp1ParityReport rp1_parity(const std::vector<Rp1Sample>& samples, double zero_tol = 1e-12);

struct ContinuityReport {
  bool complete = false;
  double max_angle_deg = 0.0;
  double max_relative_jump = 0.0;
  std::optional<double> refined_max_angle_deg;
  /// "decreasing", "stable", "increasing" or "n/a".
  std::string trend = "n/a";
};

/// Largest angle / relative magnitude jump between adjacent ok samples;
/// compared against a section recomputed with refined mesh parameters
/// when one is supplied.
ContinuityReport continuity_diagnostic(const SectionField& field, const PlaneFamily& family,
                                       const SectionField* refined = nullptr);

nlohmann::json to_json(const IndexReport& r);

}  // namespace invertlab
