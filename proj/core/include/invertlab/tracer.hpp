#pragma once

#include "invertlab/plane.hpp"
#include "invertlab/surface_mesh.hpp"

#include <string>
#include <vector>

namespace invertlab {

struct TraceOptions {
  /// Vertex residual bound ||P_perp (F(v) - q)||.
  double tol = 1e-8;
  /// Hard cap on the number of vertices created.
  std::size_t max_vertices = 400000;
  /// Smoothing sweeps after the front closes.
  int smoothing_passes = 4;
  /// Labels for the seeds, in order (default p1, p2, ...).
  std::vector<std::string> seed_labels;
};

/// Advancing-front mesh of F^{-1}(q + pi) grown from every seed and clipped
/// to the ball ||x|| <= R. Target edge length h (R / 64 when h <= 0). Seeds
/// become marked vertices. Throws PreconditionError when a seed is off the
/// surface, outside the ball or two seeds are within 3h, and NumericalError
/// (with the location) when the corrector fails after local refinement.
SurfaceMesh trace_preimage(const MapSpec& map, const Plane& plane, const std::vector<Point>& seeds, double R,
                           double h = 0.0, const TraceOptions& options = {});

/// Projector that pulls points onto F^{-1}(q + pi); residual is the norm of
/// the constraint. Boundary points are additionally pulled back into the
/// truncation ball along the surface when R is finite.
std::shared_ptr<const SurfaceProjector> make_preimage_projector(const MapSpec& map, const Plane& plane,
                                                                double tol = 1e-8);

/// Uniform subdivision: every edge split `factor` times (factor in {2, 4,
/// ...}), new points re-projected with the mesh's projector. Throws
/// NumericalError when the corrector fails and PreconditionError when the
/// topology report changes.
SurfaceMesh refine(const SurfaceMesh& mesh, int factor = 2);

/// Keeps the triangles inside ||x|| <= R, with pinched vertices resolved by
/// keeping their largest fan. `remap` receives old -> new vertex indices
/// (-1 when dropped).
SurfaceMesh clip_to_ball(const SurfaceMesh& mesh, double R, std::vector<int>* remap = nullptr);

/// Condenser domain cut out of a traced surface: the patches U_i around the
/// fiber points are removed and their rims T_i become boundary loops.
struct CondenserDomain {
  SurfaceMesh mesh;
  /// T_i as ordered vertex loops of `mesh`, one per fiber point.
  std::vector<std::vector<int>> rims;
  /// Vertex counts of the removed patches U_i.
  std::vector<std::size_t> patch_sizes;
};

/// U_i is the connected set of vertices v with ||F(v) - q|| < radius that
/// contains p_i. Throws PreconditionError when a patch reaches the mesh
/// boundary, patches overlap or touch, a p_i is not a mesh vertex, or F
/// does not wind once around q along T_i.
CondenserDomain mark_condenser_boundaries(const SurfaceMesh& mesh, const MapSpec& map, const Point& q,
                                          const std::vector<Point>& fiber_points, double radius,
                                          double vertex_tol = 1e-6);

}  // namespace invertlab
