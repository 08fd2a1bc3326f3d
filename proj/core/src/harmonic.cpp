#include "invertlab/harmonic.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <set>

namespace invertlab {

namespace {

double cot(const Point& u, const Point& v) {
  const double d = u.dot(v);
  const double c = std::sqrt(std::max(u.squaredNorm() * v.squaredNorm() - d * d, 0.0));
  if (c == 0.0) throw NumericalError("degenerate triangle in Laplacian assembly");
  return d / c;
}

std::vector<Point> face_gradients(const SurfaceMesh& mesh, const Eigen::VectorXd& u) {
  std::vector<Point> g;
  g.reserve(mesh.triangle_count());
  for (const auto& t : mesh.triangles()) {
    Matrix e(mesh.dimension(), 2);
    e.col(0) = mesh.vertex(t[1]) - mesh.vertex(t[0]);
    e.col(1) = mesh.vertex(t[2]) - mesh.vertex(t[0]);
    const Eigen::Vector2d du(u[t[1]] - u[t[0]], u[t[2]] - u[t[0]]);
    const Eigen::Matrix2d gram = e.transpose() * e;
    g.push_back(e * gram.ldlt().solve(du));
  }
  return g;
}

}  // namespace

DiscreteLaplacian DiscreteLaplacian::assemble(const SurfaceMesh& mesh) {
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangle_count() * 12);
  // Accumulate edge weights first so negative ones can be counted.
  Eigen::SparseMatrix<double> w(n, n);
  {
    std::vector<Eigen::Triplet<double>> wt;
    wt.reserve(mesh.triangle_count() * 3);
    for (const auto& t : mesh.triangles()) {
      for (int k = 0; k < 3; ++k) {
        const int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
        const double c = 0.5 * cot(mesh.vertex(i) - mesh.vertex(t[k]), mesh.vertex(j) - mesh.vertex(t[k]));
        wt.emplace_back(std::min(i, j), std::max(i, j), c);
      }
    }
    w.setFromTriplets(wt.begin(), wt.end());
  }
  DiscreteLaplacian lap;
  for (Eigen::Index col = 0; col < w.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(w, col); it; ++it) {
      const double wij = it.value();
      const auto i = it.row(), j = it.col();
      if (wij < 0.0) ++lap.negative_weights;
      trip.emplace_back(i, j, -wij);
      trip.emplace_back(j, i, -wij);
      trip.emplace_back(i, i, wij);
      trip.emplace_back(j, j, wij);
    }
  }
  lap.stiffness.resize(n, n);
  lap.stiffness.setFromTriplets(trip.begin(), trip.end());
  return lap;
}

double HarmonicField::max_principle_violation() const {
  if (constrained_values.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(constrained_values.begin(), constrained_values.end());
  double v = 0.0;
  for (Eigen::Index i = 0; i < values.size(); ++i) v = std::max({v, *lo - values[i], values[i] - *hi});
  return v;
}

HarmonicField solve_dirichlet(const SurfaceMesh& mesh, const std::vector<int>& vertices,
                              const std::vector<double>& values, std::string description) {
  const auto n = static_cast<Eigen::Index>(mesh.vertex_count());
  if (vertices.size() != values.size()) throw PreconditionError("one Dirichlet value per vertex required");
  if (vertices.empty()) throw PreconditionError("Dirichlet problem needs constrained vertices");

  std::vector<int> slot(static_cast<std::size_t>(n), -1);  // -2 constrained, else free index
  Eigen::VectorXd u = Eigen::VectorXd::Zero(n);
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const int v = vertices[k];
    if (v < 0 || v >= n) throw PreconditionError("Dirichlet vertex out of range");
    if (slot[static_cast<std::size_t>(v)] == -2 && u[v] != values[k]) {
      throw PreconditionError("conflicting Dirichlet values at vertex " + std::to_string(v));
    }
    slot[static_cast<std::size_t>(v)] = -2;
    u[v] = values[k];
  }
  std::vector<int> free_ids;
  for (Eigen::Index v = 0; v < n; ++v) {
    if (slot[static_cast<std::size_t>(v)] != -2) {
      slot[static_cast<std::size_t>(v)] = static_cast<int>(free_ids.size());
      free_ids.push_back(static_cast<int>(v));
    }
  }

  const DiscreteLaplacian lap = DiscreteLaplacian::assemble(mesh);
  HarmonicField field;
  field.negative_weights = lap.negative_weights;
  field.solver = "none";

  if (!free_ids.empty()) {
    const auto nf = static_cast<Eigen::Index>(free_ids.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nf);
    for (Eigen::Index col = 0; col < lap.stiffness.outerSize(); ++col) {
      const int sc = slot[static_cast<std::size_t>(col)];
      if (sc < 0) continue;
      for (Eigen::SparseMatrix<double>::InnerIterator it(lap.stiffness, col); it; ++it) {
        const int sr = slot[static_cast<std::size_t>(it.row())];
        if (sr >= 0) {
          trip.emplace_back(sr, sc, it.value());
        } else {
          rhs[sc] -= it.value() * u[it.row()];
        }
      }
    }
    Eigen::SparseMatrix<double> a(nf, nf);
    a.setFromTriplets(trip.begin(), trip.end());

    auto residual = [&](const Eigen::VectorXd& x) {
      const double denom = std::max(rhs.norm(), 1e-300);
      return rhs.norm() == 0.0 ? (a * x).norm() : (a * x - rhs).norm() / denom;
    };

    Eigen::VectorXd x;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
    bool ok = ldlt.info() == Eigen::Success;
    if (ok) {
      // A free region without Dirichlet data makes L_ff singular.
      const auto d = ldlt.vectorD();
      const double dmax = d.cwiseAbs().maxCoeff();
      ok = d.minCoeff() > 1e-13 * dmax;
      if (!ok) throw NumericalError("singular Dirichlet system: a free region has no constrained vertex");
      x = ldlt.solve(rhs);
      field.solver = "ldlt";
      ok = ldlt.info() == Eigen::Success && x.allFinite() && residual(x) <= 1e-10;
    }
    if (!ok) {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
      cg.setTolerance(1e-12);
      cg.setMaxIterations(10 * static_cast<int>(nf) + 100);
      cg.compute(a);
      x = cg.solve(rhs);
      field.solver = "cg";
      if (!x.allFinite() || residual(x) > 1e-10) {
        throw NumericalError("Dirichlet solve did not reach relative residual 1e-10");
      }
    }
    field.relative_residual = residual(x);
    for (Eigen::Index k = 0; k < nf; ++k) u[free_ids[static_cast<std::size_t>(k)]] = x[k];
  }

  field.mesh = std::make_shared<const SurfaceMesh>(mesh);
  field.values = std::move(u);
  field.constrained = vertices;
  field.constrained_values = values;
  field.boundary_description = std::move(description);
  field.face_gradients = face_gradients(mesh, field.values);
  field.energy = lap.energy(field.values);
  return field;
}

HarmonicField solve_condenser(const SurfaceMesh& mesh, const std::vector<int>& t1, const std::vector<int>& t2,
                              double value1, double value2) {
  if (t1.empty() || t2.empty()) throw PreconditionError("condenser loops must be non-empty");
  const std::set<int> s1(t1.begin(), t1.end());
  for (int v : t2) {
    if (s1.count(v)) throw PreconditionError("condenser loops T1 and T2 intersect");
  }
  std::vector<int> verts(t1);
  verts.insert(verts.end(), t2.begin(), t2.end());
  std::vector<double> vals(t1.size(), value1);
  vals.insert(vals.end(), t2.size(), value2);
  return solve_dirichlet(mesh, verts, vals, "condenser");
}

Point gradient_at(const HarmonicField& field, int vertex) {
  const SurfaceMesh& mesh = *field.mesh;
  if (vertex < 0 || vertex >= static_cast<int>(mesh.vertex_count())) throw PreconditionError("vertex out of range");
  if (mesh.is_boundary_vertex(vertex)) throw PreconditionError("gradient_at needs an interior vertex");
  Point g = Point::Zero(mesh.dimension());
  double area = 0.0;
  for (int t : mesh.vertex_triangles(vertex)) {
    const double a = mesh.triangle_area(t);
    g += a * field.face_gradients[static_cast<std::size_t>(t)];
    area += a;
  }
  return g / area;
}

double capacity(const HarmonicField& field) { return field.energy; }

std::vector<int> outer_boundary_vertices(const SurfaceMesh& mesh, const std::vector<int>& inner) {
  const std::set<int> in(inner.begin(), inner.end());
  std::vector<int> out;
  for (const auto& loop : mesh.boundary_loops()) {
    const bool is_inner = std::all_of(loop.begin(), loop.end(), [&](int v) { return in.count(v) > 0; });
    if (is_inner) continue;
    for (int v : loop) {
      if (!in.count(v)) out.push_back(v);
    }
  }
  return out;
}

LogNormalizedResult solve_log_normalized(const std::vector<ExhaustionLevel>& levels) {
  if (levels.empty()) throw PreconditionError("log-normalised solve needs at least one level");
  LogNormalizedResult res;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    const auto& lv = levels[k];
    if (k > 0 && !(lv.radius > levels[k - 1].radius)) throw PreconditionError("exhaustion radii must increase");
    if (lv.b < 0 || lv.mesh.is_boundary_vertex(lv.b)) throw PreconditionError("b must be an interior vertex");
    const std::vector<int> outer = outer_boundary_vertices(lv.mesh, lv.inner);
    if (outer.empty()) throw PreconditionError("exhaustion level has no outer truncation loop");
    HarmonicField f = solve_condenser(lv.mesh, lv.inner, outer);
    const double ub = f.values[lv.b];
    if (ub < 1e-12) throw NumericalError("u_R(b) below 1e-12; b is too close to T");

    LogNormalizedLevel rec;
    rec.radius = lv.radius;
    rec.raw_value_at_b = ub;
    rec.capacity = f.energy;
    f.values /= ub;
    for (auto& g : f.face_gradients) g /= ub;
    for (auto& c : f.constrained_values) c /= ub;
    f.energy /= ub * ub;
    f.boundary_description = "log-normalized";
    rec.gradient_at_b = gradient_at(f, lv.b);
    if (!res.levels.empty()) rec.cauchy_difference = (rec.gradient_at_b - res.levels.back().gradient_at_b).norm();
    res.levels.push_back(rec);
    if (k + 1 == levels.size()) res.field = std::move(f);
  }
  return res;
}

std::string_view to_string(ConformalVerdict v) {
  switch (v) {
    case ConformalVerdict::Parabolic: return "parabolic";
    case ConformalVerdict::Hyperbolic: return "hyperbolic";
    case ConformalVerdict::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

ConformalTypeReport classify_capacities(const std::vector<double>& radii, const std::vector<double>& capacities,
                                        const ConformalThresholds& thresholds) {
  if (radii.size() != capacities.size()) throw PreconditionError("one capacity per radius required");
  if (radii.size() < 3) throw PreconditionError("conformal_type needs at least three radii");
  for (std::size_t k = 1; k < radii.size(); ++k) {
    if (!(radii[k] > radii[k - 1])) throw PreconditionError("exhaustion is not nested: radii must increase");
  }
  ConformalTypeReport r;
  r.thresholds = thresholds;
  r.radii = radii;
  r.capacities = capacities;
  for (double c : capacities) r.moduli.push_back(1.0 / c);
  const std::size_t n = radii.size();

  for (std::size_t k = 1; k < n; ++k) {
    if (capacities[k] > capacities[k - 1] * (1.0 + thresholds.monotone_slack)) r.monotone = false;
  }

  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(radii[k]);
    my += r.moduli[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(radii[k]) - mx;
    sxy += dx * (r.moduli[k] - my);
    sxx += dx * dx;
  }
  r.modulus_slope = sxy / sxx;

  // Modulus increments over the last three levels; geometric decay gives a
  // finite limit, anything else an unbounded modulus.
  const double d1 = r.moduli[n - 2] - r.moduli[n - 3];
  const double d2 = r.moduli[n - 1] - r.moduli[n - 2];
  if (d1 > 0.0 && d2 >= 0.0 && d2 < d1) {
    const double rho = d2 / d1;
    r.extrapolated_modulus = r.moduli[n - 1] + d2 * rho / (1.0 - rho);
  } else if (d2 <= 0.0) {
    r.extrapolated_modulus = r.moduli[n - 1];
  } else {
    r.extrapolated_modulus = std::numeric_limits<double>::infinity();
  }
  r.extrapolated_capacity = std::isfinite(r.extrapolated_modulus) ? 1.0 / r.extrapolated_modulus : 0.0;

  const double last_change = std::abs(capacities[n - 1] - capacities[n - 2]) / capacities[n - 2];
  if (r.modulus_slope > 0.0 && r.extrapolated_capacity < thresholds.parabolic_max) {
    r.verdict = ConformalVerdict::Parabolic;
  } else if (capacities[n - 1] >= thresholds.hyperbolic_min && last_change <= thresholds.plateau_change &&
             r.extrapolated_capacity >= thresholds.hyperbolic_min) {
    r.verdict = ConformalVerdict::Hyperbolic;
  }
  return r;
}

ConformalTypeReport conformal_type(const std::vector<ExhaustionLevel>& levels, const ConformalThresholds& thresholds) {
  std::vector<double> radii, caps;
  for (const auto& lv : levels) {
    const std::vector<int> outer = outer_boundary_vertices(lv.mesh, lv.inner);
    if (outer.empty()) throw PreconditionError("exhaustion level has no outer truncation loop");
    radii.push_back(lv.radius);
    caps.push_back(capacity(solve_condenser(lv.mesh, lv.inner, outer)));
  }
  return classify_capacities(radii, caps, thresholds);
}

nlohmann::json to_json(const ConformalTypeReport& r) {
  auto finite_or_null = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  return {{"radii", r.radii},
          {"capacities", r.capacities},
          {"moduli", r.moduli},
          {"modulus_slope", r.modulus_slope},
          {"extrapolated_modulus", finite_or_null(r.extrapolated_modulus)},
          {"extrapolated_capacity", r.extrapolated_capacity},
          {"monotone", r.monotone},
          {"verdict", std::string(to_string(r.verdict))},
          {"thresholds",
           {{"parabolic_max", r.thresholds.parabolic_max},
            {"hyperbolic_min", r.thresholds.hyperbolic_min},
            {"plateau_change", r.thresholds.plateau_change}}}};
}

}  // namespace invertlab
