#pragma once

#include "invertlab/common.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace invertlab {

/// Everything a CLI run depends on. Serialises to a key = value config with
/// sections; doubles are written in shortest round-trip form so
/// parse(serialize(c)) == c exactly.
struct RunConfig {
  // [map]
  /// Builtin name (braun3d, exp_c2, cubic_shear, square_c1, identity<n>) or a
  /// path to a map config file.
  std::string map = "braun3d";

  // [target]
  std::vector<double> q;
  /// One value: cube [-v, v]^n. Two values: [lo, hi]^n. 2n values:
  /// lo1, hi1, lo2, hi2, ... Empty: [-10, 10]^n.
  std::vector<double> box;
  /// Real 2-plane through q: two spanning vectors, concatenated (2n values).
  /// Empty: span(e1, e2).
  std::vector<double> plane;
  /// Explicit fiber points (n values each, concatenated); empty means they
  /// are searched for in the box.
  std::vector<double> points;

  // [tolerances]
  double solve_tol = 1e-10;
  double mesh_tol = 1e-8;
  /// Fiber dedup radius; 0 means 1e-6 * diam(box).
  double dedup_tol = 0.0;

  // [mesh]
  /// Truncation radii; the largest is the trace radius. Empty: {10}.
  std::vector<double> radii;
  /// Edge length; 0 means R / 64.
  double h = 0.0;
  /// Radius of the ball W around q.
  double ball_radius = 0.5;
  int level = 1;
  /// Mesh for the condenser command: empty (trace the preimage),
  /// "annulus:<a>[:<h>]" (bundled flat annulus a <= |z| <= 1) or an OFF path.
  std::string mesh_source;

  // [run]
  std::uint64_t seed = 0;
  std::size_t starts = 512;
  unsigned jobs = 1;
  /// Section construction: "condenser" or "log".
  std::string construction = "condenser";
  std::string out = "invertlab-out";

  bool operator==(const RunConfig&) const = default;
};

std::string serialize(const RunConfig& config);
/// Throws ConfigError naming the offending line or key.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Comma-separated doubles; throws ConfigError mentioning `what`.
std::vector<double> parse_number_list(std::string_view text, std::string_view what);
/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

/// Box from RunConfig::box conventions.
Box make_box(const std::vector<double>& spec, int dim);

}  // namespace invertlab
