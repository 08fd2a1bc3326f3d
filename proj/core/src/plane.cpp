#include "invertlab/plane.hpp"

#include <cmath>

namespace invertlab {

namespace {

// Orthonormalises the columns of `m` in order, then appends coordinate axes
// until `total` columns are collected.
Matrix orthonormal_completion(const Matrix& m, int n, int total) {
  Matrix out(n, total);
  int k = 0;
  auto push = [&](Point v) {
    for (int j = 0; j < k; ++j) v -= out.col(j).dot(v) * out.col(j);
    for (int j = 0; j < k; ++j) v -= out.col(j).dot(v) * out.col(j);
    const double nv = v.norm();
    if (nv < 1e-6) return false;
    out.col(k++) = v / nv;
    return true;
  };
  for (Eigen::Index c = 0; c < m.cols(); ++c) {
    if (!push(m.col(c))) throw PreconditionError("plane basis vectors are linearly dependent");
  }
  for (int i = 0; i < n && k < total; ++i) push(Point::Unit(n, i));
  return out;
}

}  // namespace

Plane Plane::from_span(Point base, const Matrix& span) {
  const int n = static_cast<int>(base.size());
  if (n < 2 || span.rows() != n || span.cols() != 2) throw PreconditionError("plane needs two vectors in R^n");
  const Matrix all = orthonormal_completion(span, n, n);
  return Plane{std::move(base), all.leftCols(2), all.rightCols(n - 2)};
}

Plane Plane::from_normals(Point base, const Matrix& normals) {
  const int n = static_cast<int>(base.size());
  if (n < 2 || normals.rows() != n || normals.cols() != n - 2) {
    throw PreconditionError("plane needs n - 2 normal vectors in R^n");
  }
  const Matrix all = orthonormal_completion(normals, n, n);
  return Plane{std::move(base), all.rightCols(2), all.leftCols(n - 2)};
}

Plane Plane::coordinate(Point base, int i, int j) {
  const int n = static_cast<int>(base.size());
  if (i < 0 || j < 0 || i >= n || j >= n || i == j) throw PreconditionError("bad coordinate plane axes");
  Matrix span(n, 2);
  span.col(0) = Point::Unit(n, i);
  span.col(1) = Point::Unit(n, j);
  return from_span(std::move(base), span);
}

double Plane::gram_error() const {
  Matrix all(base.size(), tangent.cols() + normal.cols());
  all << tangent, normal;
  const Matrix g = all.transpose() * all;
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

bool Plane::contains(const Point& y, double tol) const {
  if (normal.cols() == 0) return true;
  return (normal.transpose() * (y - base)).norm() <= tol;
}

PreimageConstraint::PreimageConstraint(MapSpec map, Plane plane) : map_(std::move(map)), plane_(std::move(plane)) {
  if (map_.dimension() != plane_.dimension()) throw PreconditionError("plane and map dimensions differ");
}

Point PreimageConstraint::residual(const Point& x) const {
  return plane_.normal.transpose() * (map_.evaluate(x) - plane_.base);
}

Matrix PreimageConstraint::constraint_jacobian(const Point& x) const {
  return plane_.normal.transpose() * map_.jacobian_matrix(x);
}

std::optional<Point> PreimageConstraint::project(const Point& x0, double tol, double max_move) const {
  Point x = x0;
  if (plane_.normal.cols() == 0) return x;
  double prev = std::numeric_limits<double>::infinity();
  for (int it = 0; it < 30; ++it) {
    const Point g = residual(x);
    const double gn = g.norm();
    if (!std::isfinite(gn)) return std::nullopt;
    if (gn <= tol) return x;
    // Stalled at the rounding floor: accept only if already within tol.
    if (it > 3 && gn > 0.5 * prev) return std::nullopt;
    prev = gn;
    const Matrix a = constraint_jacobian(x);
    const Matrix aat = a * a.transpose();
    x -= a.transpose() * aat.ldlt().solve(g);
    if ((x - x0).norm() > max_move) return std::nullopt;
  }
  return residual_norm(x) <= tol ? std::optional<Point>(x) : std::nullopt;
}

Matrix PreimageConstraint::tangent_frame(const Point& x) const {
  const Matrix j = map_.jacobian_matrix(x);
  const Matrix t0 = j.partialPivLu().solve(plane_.tangent);
  Matrix t(t0.rows(), 2);
  t.col(0) = t0.col(0).normalized();
  Point v = t0.col(1) - t.col(0).dot(t0.col(1)) * t.col(0);
  t.col(1) = v.normalized();
  return t;
}

}  // namespace invertlab
