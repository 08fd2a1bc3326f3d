#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace invertlab {

using Point = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (divergence, singular system, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Axis-aligned box in R^n.
struct Box {
  Point lo;
  Point hi;

  Box() = default;
  Box(Point lower, Point upper);

  /// Cube [-half, half]^n.
  static Box centered(int dim, double half);

  int dimension() const { return static_cast<int>(lo.size()); }
  double diameter() const { return (hi - lo).norm(); }
  Point center() const { return 0.5 * (lo + hi); }
  bool contains(const Point& x, double slack = 0.0) const;
  /// Box with the same center and every half-width multiplied by `factor`.
  Box scaled(double factor) const;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots; no ordering between calls is implied.
template <typename Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn);

}  // namespace invertlab

#include "invertlab/detail/parallel.hpp"
