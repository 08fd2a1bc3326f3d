#pragma once

#include "invertlab/plane.hpp"
#include "invertlab/surface_mesh.hpp"

namespace invertlab {

/// Flat annulus inner <= |z| <= outer in R^2. Rings are geometrically
/// spaced (uniform in log r) and staggered by half an angular step, so
/// triangles are close to equilateral. n_rings = 0 picks the spacing that
/// makes them so. Boundary edge midpoints snap back onto the circles.
SurfaceMesh flat_annulus(double inner, double outer, int n_theta, int n_rings = 0);

/// Flat annulus with rings uniform in r, spacing ~h, and about 2 pi r / h
/// vertices per ring. Unlike flat_annulus it has no log-polar symmetry.
SurfaceMesh flat_annulus_uniform(double inner, double outer, double h);

/// Flat disc |z| <= radius in R^2 with hexagonal rings of spacing ~h.
SurfaceMesh flat_disc(double radius, double h);

/// Cylinder of revolution x^2 + y^2 = radius^2, 0 <= z <= length, in R^3.
SurfaceMesh cylinder(double radius, double length, int n_theta);

/// Trumpet r(s) = e^s, 0 <= s <= S, in its conformal chart: the surface of
/// revolution is conformal to the flat annulus 1 <= rho <= exp(1 - e^{-S}).
SurfaceMesh trumpet_chart(double S, int n_theta);

/// Torus grid (m x n quads) with one quad removed: chi = -1, one boundary
/// loop, genus 1.
SurfaceMesh one_holed_torus(int m, int n, double major = 2.0, double minor = 0.75);

/// Places a planar mesh (R^2) into the affine plane base + span(tangent).
SurfaceMesh embed_in_plane(const SurfaceMesh& planar, const Plane& plane);

/// Boundary loops ordered by mean distance of their vertices from `center`
/// (innermost first).
std::vector<std::vector<int>> loops_by_radius(const SurfaceMesh& mesh, const Point& center);

}  // namespace invertlab
