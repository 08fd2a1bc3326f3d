#pragma once

#include "invertlab/common.hpp"
#include "invertlab/polynomial.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace invertlab {

enum class MapKind { Builtin, PolynomialReal, PolynomialComplexRealified };

std::string_view to_string(MapKind kind);

struct JacobianSample {
  Point x;
  Matrix matrix;
  double det = 0.0;
};

namespace detail {
class MapModel;
}

/// A map R^n -> R^n with exact Jacobian evaluation.
///
/// Immutable after construction and cheap to copy; evaluate() and jacobian()
/// are pure and may be called concurrently.
class MapSpec {
 public:
  /// Named catalog entries: `braun3d`, `exp_c2`, `cubic_shear`, `square_c1`
  /// and `identity<n>` (e.g. `identity3`).
  static MapSpec builtin(std::string_view name);

  /// Real polynomial map; component i is `components[i]`.
  static MapSpec polynomial(std::string name, std::vector<RealPolynomial> components);

  /// Realification of a complex polynomial map C^n -> C^n, with coordinates
  /// interleaved as (Re z_1, Im z_1, ..., Re z_n, Im z_n).
  static MapSpec realified(std::string name, std::vector<ComplexPolynomial> components);

  int dimension() const;
  MapKind kind() const;
  const std::string& name() const;

  Point evaluate(const Point& x) const;
  Matrix jacobian_matrix(const Point& x) const;
  JacobianSample jacobian(const Point& x) const;

  /// Real component polynomials for the polynomial kinds, empty otherwise.
  const std::vector<RealPolynomial>& real_components() const;
  /// Complex source components for the realified kind, empty otherwise.
  const std::vector<ComplexPolynomial>& complex_components() const;

 private:
  explicit MapSpec(std::shared_ptr<const detail::MapModel> model);
  std::shared_ptr<const detail::MapModel> model_;
};

/// Central finite-difference Jacobian, used to validate the exact one.
Matrix finite_difference_jacobian(const MapSpec& map, const Point& x, double h = 1e-5);

struct LocalDiffeoReport {
  double min_abs_det = 0.0;
  Point argmin;
  bool sign_change = false;
  /// True when some sample has |det DF| <= tolerance.
  bool flagged = false;
  double tolerance = 0.0;
  std::size_t samples = 0;
};

/// Samples det DF over the box corners, its center and a Sobol sequence
/// started at offset `seed`.
LocalDiffeoReport local_diffeo_scan(const MapSpec& map, const Box& box, std::size_t n_samples,
                                    std::uint64_t seed = 0, double tolerance = 1e-8);

/// Parses the structured text map format:
///
///     [map]
///     name = shear
///     kind = polynomial-real
///     dimension = 2
///
///     [components]
///     f0 = 1 @ 1,0 + 1 @ 0,3
///     f1 = 1 @ 0,1
///
/// Each term is `coefficient @ exponent tuple`. With `kind =
/// polynomial-complex` coefficients may be written `(re,im)` and the map is
/// realified. Throws ConfigError with the
/// offending line or key on malformed input.
MapSpec parse_map_config(std::string_view text);
MapSpec load_map_config(const std::filesystem::path& path);

/// Builtin name or path to a map config file.
MapSpec resolve_map(std::string_view name_or_path);

}  // namespace invertlab
