#pragma once

#include "invertlab/map_catalog.hpp"

#include <optional>

namespace invertlab {

/// Affine 2-plane q + pi in R^n with orthonormal bases of pi and of its
/// orthogonal complement.
struct Plane {
  Point base;
  Matrix tangent;  // n x 2
  Matrix normal;   // n x (n-2)

  int dimension() const { return static_cast<int>(base.size()); }

  /// Plane through `base` spanned by the columns of `span` (two independent
  /// vectors, orthonormalised here). The normal basis is completed by
  /// Gram-Schmidt over e_1, ..., e_n in order.
  static Plane from_span(Point base, const Matrix& span);
  /// Plane through `base` whose orthogonal complement is spanned by the
  /// columns of `normals` (n - 2 independent vectors).
  static Plane from_normals(Point base, const Matrix& normals);
  /// span(e_i, e_j) through `base`.
  static Plane coordinate(Point base, int i, int j);

  /// max |G - I| for the Gram matrix of (u1, u2, w1, ...).
  double gram_error() const;
  bool contains(const Point& y, double tol) const;
  /// Orthogonal projection of a vector onto pi.
  Point project_vector(const Point& v) const { return tangent * (tangent.transpose() * v); }
};

/// The implicit surface {x : P_perp (F(x) - q) = 0} = F^{-1}(q + pi).
class PreimageConstraint {
 public:
  PreimageConstraint(MapSpec map, Plane plane);

  const MapSpec& map() const { return map_; }
  const Plane& plane() const { return plane_; }
  int dimension() const { return plane_.dimension(); }

  /// g(x) = W^T (F(x) - q), a vector of length n - 2.
  Point residual(const Point& x) const;
  double residual_norm(const Point& x) const { return residual(x).norm(); }
  /// W^T DF(x), (n - 2) x n.
  Matrix constraint_jacobian(const Point& x) const;

  /// Newton projection with the pseudo-inverse of the constraint Jacobian.
  /// Fails (empty) when it does not converge to `tol` or wanders farther
  /// than `max_move` from x0.
  std::optional<Point> project(const Point& x0, double tol, double max_move) const;

  /// Orthonormal basis (n x 2) of the tangent plane at x, oriented so that
  /// DF(x) maps it positively onto pi's (u1, u2).
  Matrix tangent_frame(const Point& x) const;

 private:
  MapSpec map_;
  Plane plane_;
};

}  // namespace invertlab
