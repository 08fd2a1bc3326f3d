#pragma once

#include "invertlab/map_catalog.hpp"

#include <complex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace invertlab {

using ComplexPoint = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using Spectrum = std::vector<std::complex<double>>;

/// Polynomial map C^n -> C^n, optionally presented as G = I + H.
class ComplexPolyMap {
 public:
  ComplexPolyMap(std::string name, std::vector<ComplexPolynomial> components);

  /// G = I + H; keeps H so homogeneity-based checks can use it.
  static ComplexPolyMap identity_plus(std::string name, std::vector<ComplexPolynomial> nonlinear);

  int dimension() const { return static_cast<int>(components_.size()); }
  const std::string& name() const { return name_; }
  const std::vector<ComplexPolynomial>& components() const { return components_; }
  const std::optional<std::vector<ComplexPolynomial>>& nonlinear_part() const { return nonlinear_; }

  ComplexPoint evaluate(const ComplexPoint& z) const;
  ComplexMatrix jacobian(const ComplexPoint& z) const;

 private:
  std::string name_;
  std::vector<ComplexPolynomial> components_;
  std::vector<ComplexPolynomial> partials_;
  std::optional<std::vector<ComplexPolynomial>> nonlinear_;
};

/// Realification under z_j -> (Re z_j, Im z_j), interleaved.
MapSpec realify(const ComplexPolyMap& cmap);

/// Random map C^n -> C^n of degree <= 3 with 2-5 terms per component plus a
/// generic linear diagonal term; coefficients uniform in [-1, 1]^2.
ComplexPolyMap random_complex_poly_map(std::mt19937_64& rng, int n, const std::string& name = "random");
/// Point with real and imaginary parts uniform in [-scale, scale].
ComplexPoint random_complex_point(std::mt19937_64& rng, int n, double scale = 1.0);
Point to_real(const ComplexPoint& z);
ComplexPoint to_complex(const Point& x);

/// Eigenvalues of a dense matrix. Throws NumericalError if the solver fails.
Spectrum eigenvalues(const Matrix& m);
Spectrum eigenvalues(const ComplexMatrix& m);

/// Greedy closest-pair matching of two multisets (with multiplicity).
struct MultisetMatch {
  bool same_size = false;
  double max_distance = 0.0;
  /// pairs (index in a, index in b)
  std::vector<std::pair<int, int>> pairing;
};
MultisetMatch match_multisets(const Spectrum& a, const Spectrum& b);

struct DetIdentityReport {
  double complex_det_abs2 = 0.0;  // |det DG(z0)|^2
  double real_det = 0.0;          // det DG^(x0)
  double rel_error = 0.0;
  bool pass = false;
};
DetIdentityReport det_identity_check(const ComplexPolyMap& cmap, const ComplexPoint& z0,
                                     double tolerance = 1e-10);

struct SpectrumReport {
  ComplexPoint z0;
  Spectrum complex_spectrum;    // Spec DG(z0)
  Spectrum realified_spectrum;  // Spec DG^(x0)
  bool match = false;
  double max_pairing_distance = 0.0;
  double tolerance = 0.0;
};
/// Checks Spec DG^ = Spec DG united with its conjugate, as multisets.
SpectrumReport spectrum_identity_check(const ComplexPolyMap& cmap, const ComplexPoint& z0,
                                       double tolerance = 1e-8);

struct NilpotencyReport {
  int degree = 0;
  double homogeneity_error = 0.0;
  double max_abs_eigenvalue = 0.0;
  std::size_t samples = 0;
  double tolerance = 0.0;
  bool pass = false;
};

/// max |eigenvalue of DH(z)| over random samples, after verifying
/// H(tz) = t^k H(z) numerically. Throws PreconditionError for
/// non-homogeneous H or a map without an I + H presentation.
NilpotencyReport nilpotent_homogeneous_check(const ComplexPolyMap& cmap, std::size_t n_samples,
                                             std::uint64_t seed = 0, double tolerance = 1e-8);
/// Real counterpart; `perturbation` is H itself.
NilpotencyReport nilpotent_homogeneous_check(const MapSpec& perturbation, std::size_t n_samples,
                                             std::uint64_t seed = 0, double tolerance = 1e-8);

/// F = I + H for a polynomial map. Throws PreconditionError when the map is
/// not polynomial.
struct IdentityPlus {
  MapSpec map;
  MapSpec perturbation;
};
IdentityPlus decompose_identity_plus(const MapSpec& map);

struct EulerCertificate {
  double max_residual = 0.0;         // max ||DF(x)x - 3F(x) + 2x||
  double max_scaled_residual = 0.0;  // residual / (1 + 3||F(x)|| + 2||x||)
  /// Minimum over samples of the distance from -2 to Spec DF(x).
  double min_distance_to_minus_two = 0.0;
  /// Maximum over samples of the distance from 1 to Spec DF(x).
  double max_distance_to_one = 0.0;
  std::size_t samples = 0;
  bool minus_two_excluded = false;
  bool residual_ok = false;
  bool pass = false;
};

/// Euler-relation certificate for F = I + H with H cubic-homogeneous:
/// DF(x)x = 3F(x) - 2x together with -2 never being an eigenvalue of DF(x)
/// rules out nonzero solutions of F(x) = 0.
EulerCertificate euler_relation_certificate(const IdentityPlus& f, std::size_t n_samples, const Box& box,
                                            std::uint64_t seed = 0, double residual_tolerance = 1e-12,
                                            double eigen_tolerance = 1e-8);

}  // namespace invertlab
