#include "invertlab/map_catalog.hpp"

#include <boost/random/sobol.hpp>

#include <charconv>
#include <cmath>
#include <limits>

namespace invertlab {

Box::Box(Point lower, Point upper) : lo(std::move(lower)), hi(std::move(upper)) {
  if (lo.size() != hi.size()) throw PreconditionError("box corner dimensions differ");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (!(hi[i] > lo[i])) throw PreconditionError("degenerate box: hi <= lo on some axis");
  }
}

Box Box::centered(int dim, double half) {
  return Box(Point::Constant(dim, -half), Point::Constant(dim, half));
}

bool Box::contains(const Point& x, double slack) const {
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (x[i] < lo[i] - slack || x[i] > hi[i] + slack) return false;
  }
  return true;
}

Box Box::scaled(double factor) const {
  const Point c = center();
  const Point half = 0.5 * factor * (hi - lo);
  return Box(c - half, c + half);
}

std::string_view to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Builtin: return "builtin";
    case MapKind::PolynomialReal: return "polynomial-real";
    case MapKind::PolynomialComplexRealified: return "polynomial-complex-realified";
  }
  return "unknown";
}

namespace detail {

class MapModel {
 public:
  MapModel(std::string name, int dim, MapKind kind) : name_(std::move(name)), dim_(dim), kind_(kind) {}
  virtual ~MapModel() = default;

  virtual Point evaluate(const Point& x) const = 0;
  virtual Matrix jacobian(const Point& x) const = 0;

  const std::string& name() const { return name_; }
  int dimension() const { return dim_; }
  MapKind kind() const { return kind_; }

  std::vector<RealPolynomial> real_components;
  std::vector<ComplexPolynomial> complex_components;

 private:
  std::string name_;
  int dim_;
  MapKind kind_;
};

}  // namespace detail

namespace {

using detail::MapModel;

// F(x,y,z) = (z^5 + e^x cos y, z^3 + e^x sin y, z); det DF = e^{2x}.
class Braun3d final : public MapModel {
 public:
  Braun3d() : MapModel("braun3d", 3, MapKind::Builtin) {}

  Point evaluate(const Point& p) const override {
    const double ex = std::exp(p[0]);
    const double z = p[2];
    const double z3 = z * z * z;
    return Eigen::Vector3d(z3 * z * z + ex * std::cos(p[1]), z3 + ex * std::sin(p[1]), z);
  }

  Matrix jacobian(const Point& p) const override {
    const double ex = std::exp(p[0]);
    const double c = std::cos(p[1]);
    const double s = std::sin(p[1]);
    const double z = p[2];
    Matrix j(3, 3);
    j << ex * c, -ex * s, 5.0 * z * z * z * z,
         ex * s, ex * c, 3.0 * z * z,
         0.0, 0.0, 1.0;
    return j;
  }
};

// Realification of G(z1, z2) = (e^{z1}, z2 e^{-z1}); det DG = 1.
class ExpC2 final : public MapModel {
 public:
  ExpC2() : MapModel("exp_c2", 4, MapKind::Builtin) {}

  Point evaluate(const Point& p) const override {
    const std::complex<double> z1(p[0], p[1]);
    const std::complex<double> z2(p[2], p[3]);
    const auto g1 = std::exp(z1);
    const auto g2 = z2 * std::exp(-z1);
    return Eigen::Vector4d(g1.real(), g1.imag(), g2.real(), g2.imag());
  }

  Matrix jacobian(const Point& p) const override {
    const std::complex<double> z1(p[0], p[1]);
    const std::complex<double> z2(p[2], p[3]);
    // Complex partials, then the standard 2x2 real block [[a, -b], [b, a]].
    const std::complex<double> d11 = std::exp(z1);
    const std::complex<double> d12 = 0.0;
    const std::complex<double> d21 = -z2 * std::exp(-z1);
    const std::complex<double> d22 = std::exp(-z1);
    Matrix j = Matrix::Zero(4, 4);
    auto block = [&j](int r, int c, std::complex<double> d) {
      j(2 * r, 2 * c) = d.real();
      j(2 * r, 2 * c + 1) = -d.imag();
      j(2 * r + 1, 2 * c) = d.imag();
      j(2 * r + 1, 2 * c + 1) = d.real();
    };
    block(0, 0, d11);
    block(0, 1, d12);
    block(1, 0, d21);
    block(1, 1, d22);
    return j;
  }
};

class PolynomialModel final : public MapModel {
 public:
  PolynomialModel(std::string name, MapKind kind, std::vector<RealPolynomial> comps)
      : MapModel(std::move(name), static_cast<int>(comps.size()), kind) {
    const int n = dimension();
    for (const auto& c : comps) {
      if (c.num_vars() != n) {
        throw PreconditionError("polynomial map component has " + std::to_string(c.num_vars()) +
                                " variables, expected " + std::to_string(n));
      }
    }
    partials_.reserve(static_cast<std::size_t>(n * n));
    for (const auto& c : comps) {
      for (int v = 0; v < n; ++v) partials_.push_back(c.derivative(v));
    }
    real_components = std::move(comps);
  }

  Point evaluate(const Point& x) const override {
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    Point out(dimension());
    for (int i = 0; i < dimension(); ++i) out[i] = real_components[i].evaluate(xs);
    return out;
  }

  Matrix jacobian(const Point& x) const override {
    const int n = dimension();
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.size()));
    Matrix j(n, n);
    for (int i = 0; i < n; ++i) {
      for (int v = 0; v < n; ++v) j(i, v) = partials_[static_cast<std::size_t>(i * n + v)].evaluate(xs);
    }
    return j;
  }

 private:
  std::vector<RealPolynomial> partials_;
};

std::shared_ptr<const MapModel> identity_model(int n) {
  std::vector<RealPolynomial> comps;
  for (int i = 0; i < n; ++i) comps.push_back(RealPolynomial::variable(n, i));
  return std::make_shared<PolynomialModel>("identity" + std::to_string(n), MapKind::PolynomialReal,
                                           std::move(comps));
}

void check_dimension(const MapModel& m, const Point& x) {
  if (x.size() != m.dimension()) {
    throw PreconditionError("point has dimension " + std::to_string(x.size()) + " but map '" +
                            m.name() + "' has dimension " + std::to_string(m.dimension()));
  }
}

}  // namespace

MapSpec::MapSpec(std::shared_ptr<const detail::MapModel> model) : model_(std::move(model)) {}

MapSpec MapSpec::builtin(std::string_view name) {
  if (name == "braun3d") return MapSpec(std::make_shared<Braun3d>());
  if (name == "exp_c2") return MapSpec(std::make_shared<ExpC2>());
  if (name == "cubic_shear") {
    // (x + y^3, y)
    RealPolynomial f0(2, {{{1, 0}, 1.0}, {{0, 3}, 1.0}});
    RealPolynomial f1(2, {{{0, 1}, 1.0}});
    return MapSpec(std::make_shared<PolynomialModel>("cubic_shear", MapKind::PolynomialReal,
                                                     std::vector{f0, f1}));
  }
  if (name == "square_c1") {
    return realified("square_c1", {ComplexPolynomial(1, {{{2}, {1.0, 0.0}}})});
  }
  if (name.starts_with("identity")) {
    const auto digits = name.substr(8);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && n >= 1 && n <= 64) {
      return MapSpec(identity_model(n));
    }
  }
  throw ConfigError("unknown builtin map '" + std::string(name) +
                    "' (known: braun3d, exp_c2, cubic_shear, square_c1, identity<n>)");
}

MapSpec MapSpec::polynomial(std::string name, std::vector<RealPolynomial> components) {
  if (components.empty()) throw PreconditionError("polynomial map needs at least one component");
  return MapSpec(std::make_shared<PolynomialModel>(std::move(name), MapKind::PolynomialReal,
                                                   std::move(components)));
}

MapSpec MapSpec::realified(std::string name, std::vector<ComplexPolynomial> components) {
  if (components.empty()) throw PreconditionError("complex map needs at least one component");
  const int n = static_cast<int>(components.size());
  std::vector<RealPolynomial> real;
  real.reserve(2 * components.size());
  for (const auto& c : components) {
    if (c.num_vars() != n) throw PreconditionError("complex map component variable count mismatch");
    auto r = realify(c);
    real.push_back(std::move(r.real));
    real.push_back(std::move(r.imag));
  }
  // Components that vanish identically still need 2n variables.
  for (auto& r : real) {
    if (r.num_vars() != 2 * n) r = RealPolynomial(2 * n);
  }
  auto model = std::make_shared<PolynomialModel>(std::move(name), MapKind::PolynomialComplexRealified,
                                                 std::move(real));
  model->complex_components = std::move(components);
  return MapSpec(std::move(model));
}

int MapSpec::dimension() const { return model_->dimension(); }
MapKind MapSpec::kind() const { return model_->kind(); }
const std::string& MapSpec::name() const { return model_->name(); }

Point MapSpec::evaluate(const Point& x) const {
  check_dimension(*model_, x);
  return model_->evaluate(x);
}

Matrix MapSpec::jacobian_matrix(const Point& x) const {
  check_dimension(*model_, x);
  return model_->jacobian(x);
}

JacobianSample MapSpec::jacobian(const Point& x) const {
  JacobianSample s;
  s.x = x;
  s.matrix = jacobian_matrix(x);
  s.det = s.matrix.partialPivLu().determinant();
  return s;
}

const std::vector<RealPolynomial>& MapSpec::real_components() const {
  return model_->real_components;
}

const std::vector<ComplexPolynomial>& MapSpec::complex_components() const {
  return model_->complex_components;
}

Matrix finite_difference_jacobian(const MapSpec& map, const Point& x, double h) {
  const int n = map.dimension();
  Matrix j(n, n);
  for (int v = 0; v < n; ++v) {
    Point xp = x;
    Point xm = x;
    xp[v] += h;
    xm[v] -= h;
    j.col(v) = (map.evaluate(xp) - map.evaluate(xm)) / (2.0 * h);
  }
  return j;
}

LocalDiffeoReport local_diffeo_scan(const MapSpec& map, const Box& box, std::size_t n_samples,
                                    std::uint64_t seed, double tolerance) {
  const int n = map.dimension();
  if (box.dimension() != n) throw PreconditionError("scan box dimension does not match map");

  LocalDiffeoReport report;
  report.tolerance = tolerance;
  report.min_abs_det = std::numeric_limits<double>::infinity();
  int first_sign = 0;

  auto visit = [&](const Point& x) {
    const double det = map.jacobian(x).det;
    const double a = std::abs(det);
    if (a < report.min_abs_det) {
      report.min_abs_det = a;
      report.argmin = x;
    }
    const int sign = det > 0.0 ? 1 : (det < 0.0 ? -1 : 0);
    if (sign != 0) {
      if (first_sign == 0) first_sign = sign;
      else if (sign != first_sign) report.sign_change = true;
    }
    if (a <= tolerance) report.flagged = true;
    ++report.samples;
  };

  if (n <= 16) {
    for (unsigned mask = 0; mask < (1u << n); ++mask) {
      Point c(n);
      for (int i = 0; i < n; ++i) c[i] = (mask >> i) & 1u ? box.hi[i] : box.lo[i];
      visit(c);
    }
  }
  visit(box.center());

  boost::random::sobol qrng(static_cast<std::size_t>(n));
  qrng.seed(static_cast<boost::random::sobol::result_type>(seed));
  const double scale = 1.0 / (static_cast<double>((boost::random::sobol::max)()) + 1.0);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Point x(n);
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(qrng()) * scale;
      x[i] = box.lo[i] + u * (box.hi[i] - box.lo[i]);
    }
    visit(x);
  }
  return report;
}

}  // namespace invertlab
