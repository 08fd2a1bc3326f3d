#include "invertlab/spectral.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace invertlab {

using Complex = std::complex<double>;

ComplexPolyMap::ComplexPolyMap(std::string name, std::vector<ComplexPolynomial> components)
    : name_(std::move(name)), components_(std::move(components)) {
  const int n = dimension();
  if (n == 0) throw PreconditionError("complex map needs at least one component");
  for (const auto& c : components_) {
    if (c.num_vars() != n) throw PreconditionError("complex map component variable count mismatch");
    for (int v = 0; v < n; ++v) partials_.push_back(c.derivative(v));
  }
}

ComplexPolyMap ComplexPolyMap::identity_plus(std::string name, std::vector<ComplexPolynomial> nonlinear) {
  const int n = static_cast<int>(nonlinear.size());
  std::vector<ComplexPolynomial> full;
  for (int i = 0; i < n; ++i) {
    if (nonlinear[i].num_vars() != n) nonlinear[i] = ComplexPolynomial(n);
    full.push_back(ComplexPolynomial::variable(n, i) + nonlinear[i]);
  }
  ComplexPolyMap m(std::move(name), std::move(full));
  m.nonlinear_ = std::move(nonlinear);
  return m;
}

ComplexPoint ComplexPolyMap::evaluate(const ComplexPoint& z) const {
  if (z.size() != dimension()) throw PreconditionError("complex point dimension mismatch");
  const std::span<const Complex> zs(z.data(), static_cast<std::size_t>(z.size()));
  ComplexPoint out(dimension());
  for (int i = 0; i < dimension(); ++i) out[i] = components_[i].evaluate(zs);
  return out;
}

ComplexMatrix ComplexPolyMap::jacobian(const ComplexPoint& z) const {
  if (z.size() != dimension()) throw PreconditionError("complex point dimension mismatch");
  const int n = dimension();
  const std::span<const Complex> zs(z.data(), static_cast<std::size_t>(z.size()));
  ComplexMatrix j(n, n);
  for (int i = 0; i < n; ++i) {
    for (int v = 0; v < n; ++v) j(i, v) = partials_[static_cast<std::size_t>(i * n + v)].evaluate(zs);
  }
  return j;
}

MapSpec realify(const ComplexPolyMap& cmap) { return MapSpec::realified(cmap.name(), cmap.components()); }

Point to_real(const ComplexPoint& z) {
  Point x(2 * z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    x[2 * j] = z[j].real();
    x[2 * j + 1] = z[j].imag();
  }
  return x;
}

ComplexPoint to_complex(const Point& x) {
  if (x.size() % 2 != 0) throw PreconditionError("realified point must have even dimension");
  ComplexPoint z(x.size() / 2);
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = Complex(x[2 * j], x[2 * j + 1]);
  return z;
}

Spectrum eigenvalues(const Matrix& m) {
  Eigen::EigenSolver<Matrix> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("real eigen-solver failed to converge");
  const auto ev = solver.eigenvalues();
  return Spectrum(ev.data(), ev.data() + ev.size());
}

Spectrum eigenvalues(const ComplexMatrix& m) {
  Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, false);
  if (solver.info() != Eigen::Success) throw NumericalError("complex eigen-solver failed to converge");
  const auto ev = solver.eigenvalues();
  return Spectrum(ev.data(), ev.data() + ev.size());
}

MultisetMatch match_multisets(const Spectrum& a, const Spectrum& b) {
  MultisetMatch out;
  out.same_size = a.size() == b.size();
  if (!out.same_size) {
    out.max_distance = std::numeric_limits<double>::infinity();
    return out;
  }
  std::vector<bool> used_a(a.size(), false);
  std::vector<bool> used_b(b.size(), false);
  for (std::size_t round = 0; round < a.size(); ++round) {
    double best = std::numeric_limits<double>::infinity();
    int bi = -1;
    int bj = -1;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (used_a[i]) continue;
      for (std::size_t j = 0; j < b.size(); ++j) {
        if (used_b[j]) continue;
        const double d = std::abs(a[i] - b[j]);
        if (d < best) {
          best = d;
          bi = static_cast<int>(i);
          bj = static_cast<int>(j);
        }
      }
    }
    used_a[static_cast<std::size_t>(bi)] = true;
    used_b[static_cast<std::size_t>(bj)] = true;
    out.pairing.emplace_back(bi, bj);
    out.max_distance = std::max(out.max_distance, best);
  }
  return out;
}

DetIdentityReport det_identity_check(const ComplexPolyMap& cmap, const ComplexPoint& z0, double tolerance) {
  DetIdentityReport r;
  const Complex dg = cmap.jacobian(z0).determinant();
  r.complex_det_abs2 = std::norm(dg);
  const MapSpec real = realify(cmap);
  r.real_det = real.jacobian(to_real(z0)).det;
  const double scale = std::max({std::abs(r.complex_det_abs2), std::abs(r.real_det),
                                 std::numeric_limits<double>::min()});
  r.rel_error = std::abs(r.complex_det_abs2 - r.real_det) / scale;
  r.pass = r.rel_error <= tolerance || (r.complex_det_abs2 == 0.0 && r.real_det == 0.0);
  return r;
}

SpectrumReport spectrum_identity_check(const ComplexPolyMap& cmap, const ComplexPoint& z0, double tolerance) {
  SpectrumReport r;
  r.z0 = z0;
  r.tolerance = tolerance;
  r.complex_spectrum = eigenvalues(cmap.jacobian(z0));
  r.realified_spectrum = eigenvalues(realify(cmap).jacobian_matrix(to_real(z0)));

  Spectrum expected = r.complex_spectrum;
  for (const auto& l : r.complex_spectrum) expected.push_back(std::conj(l));
  const auto m = match_multisets(expected, r.realified_spectrum);
  r.max_pairing_distance = m.max_distance;
  r.match = m.same_size && m.max_distance <= tolerance;
  return r;
}

namespace {

// Largest total degree across components; 0 when H vanishes identically.
template <typename Poly>
int map_degree(const std::vector<Poly>& comps) {
  int k = 0;
  for (const auto& c : comps) k = std::max(k, c.degree());
  return k;
}

template <typename Eval, typename Sample, typename Scalar>
double homogeneity_error(Eval&& eval, Sample&& sample, int k, std::size_t trials, std::mt19937_64& rng,
                         Scalar /*tag*/) {
  std::uniform_real_distribution<double> tdist(0.5, 2.0);
  double worst = 0.0;
  for (std::size_t s = 0; s < trials; ++s) {
    const auto x = sample();
    const Scalar t = static_cast<Scalar>(tdist(rng));
    const auto hx = eval(x);
    const auto htx = eval((t * x).eval());
    const auto scaled = (std::pow(t, k) * hx).eval();
    const double denom = std::max(scaled.norm(), std::numeric_limits<double>::min());
    if (scaled.norm() == 0.0 && htx.norm() == 0.0) continue;
    worst = std::max(worst, (htx - scaled).norm() / denom);
  }
  return worst;
}

constexpr double kHomogeneityTolerance = 1e-10;

}  // namespace

NilpotencyReport nilpotent_homogeneous_check(const ComplexPolyMap& cmap, std::size_t n_samples,
                                             std::uint64_t seed, double tolerance) {
  if (!cmap.nonlinear_part()) {
    throw PreconditionError("nilpotency check needs a map presented as I + H");
  }
  const ComplexPolyMap h(cmap.name() + ".H", *cmap.nonlinear_part());
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto sample = [&] {
    ComplexPoint z(h.dimension());
    for (auto& c : z) c = Complex(u(rng), u(rng));
    return z;
  };

  NilpotencyReport r;
  r.tolerance = tolerance;
  r.degree = map_degree(h.components());
  if (r.degree == 1) throw PreconditionError("H must be homogeneous of degree k > 1");
  if (r.degree > 1) {
    r.homogeneity_error = homogeneity_error([&](const ComplexPoint& z) { return h.evaluate(z); }, sample,
                                            r.degree, 16, rng, Complex{});
    if (r.homogeneity_error > kHomogeneityTolerance) {
      throw PreconditionError("H is not homogeneous of degree " + std::to_string(r.degree) +
                              " (relative error " + std::to_string(r.homogeneity_error) + ")");
    }
  }
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (const auto& l : eigenvalues(h.jacobian(sample()))) {
      r.max_abs_eigenvalue = std::max(r.max_abs_eigenvalue, std::abs(l));
    }
    ++r.samples;
  }
  r.pass = r.max_abs_eigenvalue <= tolerance;
  return r;
}

NilpotencyReport nilpotent_homogeneous_check(const MapSpec& perturbation, std::size_t n_samples,
                                             std::uint64_t seed, double tolerance) {
  if (perturbation.real_components().empty()) {
    throw PreconditionError("nilpotency check needs a polynomial H");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto sample = [&] {
    Point x(perturbation.dimension());
    for (auto& c : x) c = u(rng);
    return x;
  };

  NilpotencyReport r;
  r.tolerance = tolerance;
  r.degree = map_degree(perturbation.real_components());
  if (r.degree == 1) throw PreconditionError("H must be homogeneous of degree k > 1");
  if (r.degree > 1) {
    r.homogeneity_error = homogeneity_error([&](const Point& x) { return perturbation.evaluate(x); }, sample,
                                            r.degree, 16, rng, 0.0);
    if (r.homogeneity_error > kHomogeneityTolerance) {
      throw PreconditionError("H is not homogeneous of degree " + std::to_string(r.degree) +
                              " (relative error " + std::to_string(r.homogeneity_error) + ")");
    }
  }
  for (std::size_t s = 0; s < n_samples; ++s) {
    for (const auto& l : eigenvalues(perturbation.jacobian_matrix(sample()))) {
      r.max_abs_eigenvalue = std::max(r.max_abs_eigenvalue, std::abs(l));
    }
    ++r.samples;
  }
  r.pass = r.max_abs_eigenvalue <= tolerance;
  return r;
}

IdentityPlus decompose_identity_plus(const MapSpec& map) {
  const auto& comps = map.real_components();
  if (comps.empty()) {
    throw PreconditionError("map '" + map.name() + "' has no polynomial I + H decomposition");
  }
  const int n = map.dimension();
  std::vector<RealPolynomial> h;
  for (int i = 0; i < n; ++i) h.push_back(comps[i] - RealPolynomial::variable(n, i));
  for (auto& p : h) {
    if (p.num_vars() != n) p = RealPolynomial(n);
  }
  return {map, MapSpec::polynomial(map.name() + ".H", std::move(h))};
}

EulerCertificate euler_relation_certificate(const IdentityPlus& f, std::size_t n_samples, const Box& box,
                                            std::uint64_t seed, double residual_tolerance,
                                            double eigen_tolerance) {
  const int n = f.map.dimension();
  if (box.dimension() != n) throw PreconditionError("certificate box dimension does not match map");
  const int k = map_degree(f.perturbation.real_components());
  if (k != 0 && k != 3) {
    throw PreconditionError("Euler certificate needs H cubic-homogeneous, got degree " + std::to_string(k));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto sample = [&] {
    Point x(n);
    for (int i = 0; i < n; ++i) x[i] = box.lo[i] + u(rng) * (box.hi[i] - box.lo[i]);
    return x;
  };
  if (k == 3) {
    const double err = homogeneity_error([&](const Point& x) { return f.perturbation.evaluate(x); }, sample, 3,
                                         16, rng, 0.0);
    if (err > kHomogeneityTolerance) throw PreconditionError("H is not cubic-homogeneous");
  }

  EulerCertificate c;
  c.min_distance_to_minus_two = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < n_samples; ++s) {
    const Point x = sample();
    const Point fx = f.map.evaluate(x);
    const Matrix df = f.map.jacobian_matrix(x);
    const double res = (df * x - 3.0 * fx + 2.0 * x).norm();
    c.max_residual = std::max(c.max_residual, res);
    c.max_scaled_residual = std::max(c.max_scaled_residual, res / (1.0 + 3.0 * fx.norm() + 2.0 * x.norm()));
    for (const auto& l : eigenvalues(df)) {
      c.min_distance_to_minus_two = std::min(c.min_distance_to_minus_two, std::abs(l + 2.0));
      c.max_distance_to_one = std::max(c.max_distance_to_one, std::abs(l - 1.0));
    }
    ++c.samples;
  }
  c.residual_ok = c.max_scaled_residual <= residual_tolerance;
  c.minus_two_excluded = c.min_distance_to_minus_two > eigen_tolerance;
  c.pass = c.residual_ok && c.minus_two_excluded;
  return c;
}

ComplexPolyMap random_complex_poly_map(std::mt19937_64& rng, int n, const std::string& name) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, 3), var(0, n - 1), count(2, 5);
  std::vector<ComplexPolynomial> comps;
  for (int i = 0; i < n; ++i) {
    std::vector<ComplexPolynomial::Term> terms;
    const int k = count(rng);
    for (int t = 0; t < k; ++t) {
      Exponents e(static_cast<std::size_t>(n), 0);
      const int d = deg(rng);
      for (int j = 0; j < d; ++j) ++e[static_cast<std::size_t>(var(rng))];
      terms.push_back({e, {u(rng), u(rng)}});
    }
    // keeps DG from being identically singular
    Exponents lin(static_cast<std::size_t>(n), 0);
    lin[static_cast<std::size_t>(i)] = 1;
    terms.push_back({lin, {1.0 + u(rng), u(rng)}});
    comps.emplace_back(n, terms);
  }
  return ComplexPolyMap(name, comps);
}

ComplexPoint random_complex_point(std::mt19937_64& rng, int n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  ComplexPoint z(n);
  for (int i = 0; i < n; ++i) z[i] = {u(rng), u(rng)};
  return z;
}

}  // namespace invertlab
