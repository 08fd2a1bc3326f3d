#include "invertlab/fiber.hpp"

#include <Eigen/SVD>
#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace invertlab {

namespace {

constexpr double kArmijo = 1e-4;

bool lex_less(const Point& a, const Point& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

Point newton_direction(const Matrix& j, const Point& r) {
  Eigen::PartialPivLU<Matrix> lu(j);
  Point d = lu.solve(-r);
  if (!d.allFinite()) d = j.colPivHouseholderQr().solve(-r);
  return d;
}

double reciprocal_condition(const Matrix& j) {
  Eigen::JacobiSVD<Matrix> svd(j);
  const auto& s = svd.singularValues();
  if (s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

}  // namespace

NewtonResult damped_newton(const MapSpec& map, const Point& q, Point x0, const NewtonOptions& options) {
  NewtonResult res;
  res.x = std::move(x0);
  Point r = map.evaluate(res.x) - q;
  double phi = 0.5 * r.squaredNorm();

  for (res.iterations = 0; res.iterations < options.max_iterations; ++res.iterations) {
    if (!std::isfinite(phi)) break;
    if (std::sqrt(2.0 * phi) <= options.tol) {
      res.converged = true;
      break;
    }
    const Point d = newton_direction(map.jacobian_matrix(res.x), r);
    if (!d.allFinite()) break;

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      const Point trial = res.x + t * d;
      const Point rt = map.evaluate(trial) - q;
      const double phit = 0.5 * rt.squaredNorm();
      if (std::isfinite(phit) && phit <= (1.0 - 2.0 * kArmijo * t) * phi) {
        res.x = trial;
        r = rt;
        phi = phit;
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    if (options.escape_box && !options.escape_box->contains(res.x)) break;
  }

  if (res.converged) {
    // A couple of undamped polishing steps drive the point to working precision.
    for (int k = 0; k < 2; ++k) {
      const Point trial = res.x + newton_direction(map.jacobian_matrix(res.x), r);
      const Point rt = map.evaluate(trial) - q;
      if (!(rt.norm() < r.norm())) break;
      res.x = trial;
      r = rt;
    }
  }
  res.residual = r.norm();
  return res;
}

nlohmann::json to_json(const FiberReport& r, const MapSpec* map) {
  auto vec = [](const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); };
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    nlohmann::json j = {{"x", vec(p.x)}, {"residual", p.residual}};
    if (map) {
      const JacobianSample js = map->jacobian(p.x);
      const Eigen::JacobiSVD<Matrix> svd(js.matrix);
      const auto& sv = svd.singularValues();
      j["det"] = js.det;
      j["condition"] = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
    }
    pts.push_back(std::move(j));
  }
  return {{"target", vec(r.target)},
          {"box", {{"lo", vec(r.box.lo)}, {"hi", vec(r.box.hi)}}},
          {"points", pts},
          {"count", r.points.size()},
          {"dedup_radius", r.dedup_radius},
          {"tol", r.tol},
          {"n_starts", r.n_starts},
          {"converged", r.converged},
          {"diverged", r.diverged},
          {"outside_box", r.outside_box},
          {"seed", r.seed}};
}

FiberReport enumerate_fiber(const MapSpec& map, const Point& q, const Box& box, const FiberOptions& options) {
  const int n = map.dimension();
  if (q.size() != n) throw PreconditionError("target dimension does not match map");
  if (box.dimension() != n) throw PreconditionError("search box dimension does not match map");

  FiberReport report;
  report.target = q;
  report.box = box;
  report.tol = options.tol;
  report.n_starts = options.n_starts;
  report.seed = options.seed;
  report.dedup_radius = options.dedup_radius.value_or(1e-6 * box.diameter());

  // Starts are generated serially so the stream does not depend on `jobs`.
  std::vector<Point> starts(options.n_starts, Point(n));
  boost::random::sobol qrng(static_cast<std::size_t>(n));
  qrng.seed(static_cast<boost::random::sobol::result_type>(options.seed));
  const double scale = 1.0 / (static_cast<double>((boost::random::sobol::max)()) + 1.0);
  for (auto& s : starts) {
    for (int i = 0; i < n; ++i) {
      s[i] = box.lo[i] + static_cast<double>(qrng()) * scale * (box.hi[i] - box.lo[i]);
    }
  }

  NewtonOptions newton;
  newton.tol = options.tol;
  newton.max_iterations = options.max_iterations;
  newton.escape_box = box.scaled(2.0);

  std::vector<NewtonResult> results(starts.size());
  parallel_for(starts.size(), options.jobs,
               [&](std::size_t i) { results[i] = damped_newton(map, q, starts[i], newton); });

  std::vector<FiberPoint> found;
  for (const auto& r : results) {
    if (!r.converged) {
      ++report.diverged;
      continue;
    }
    ++report.converged;
    if (!box.contains(r.x)) {
      ++report.outside_box;
      continue;
    }
    found.push_back({r.x, r.residual});
  }

  std::sort(found.begin(), found.end(), [](const FiberPoint& a, const FiberPoint& b) { return lex_less(a.x, b.x); });
  for (const auto& p : found) {
    const bool duplicate = std::any_of(report.points.begin(), report.points.end(), [&](const FiberPoint& kept) {
      return (kept.x - p.x).norm() < report.dedup_radius;
    });
    if (duplicate) continue;
    // Re-verify from scratch so the reported residual is reproducible.
    const double residual = (map.evaluate(p.x) - q).norm();
    if (residual <= options.tol) report.points.push_back({p.x, residual});
  }
  return report;
}

std::string_view to_string(LiftStatus s) {
  switch (s) {
    case LiftStatus::Complete: return "complete";
    case LiftStatus::EscapedBox: return "escaped-box";
    case LiftStatus::StepFailure: return "step-failure";
  }
  return "unknown";
}

LiftedPath lift_path(const MapSpec& map, const Point& start, const std::vector<Point>& target_path,
                     const LiftOptions& options) {
  if (target_path.empty()) throw PreconditionError("lift_path needs a non-empty target path");
  const int n = map.dimension();
  for (const auto& y : target_path) {
    if (y.size() != n) throw PreconditionError("target path dimension does not match map");
  }
  const double start_gap = (map.evaluate(start) - target_path.front()).norm();
  if (start_gap > 1e-6 * (1.0 + target_path.front().norm())) {
    throw PreconditionError("lift_path: F(start) differs from the path start by " + std::to_string(start_gap));
  }

  LiftedPath path;
  NewtonOptions polish;
  polish.tol = options.tol;
  polish.max_iterations = 20;
  Point x = damped_newton(map, target_path.front(), start, polish).x;
  path.target_nodes.push_back(target_path.front());
  path.lifted_nodes.push_back(x);

  auto fail = [&](LiftStatus status, const Point& where, std::string msg) {
    path.status = status;
    path.failure_location = where;
    path.message = std::move(msg);
    return path;
  };

  double h = options.step;
  for (std::size_t seg = 0; seg + 1 < target_path.size(); ++seg) {
    const Point& ya = target_path[seg];
    const Point& yb = target_path[seg + 1];
    const double len = (yb - ya).norm();
    double s = 0.0;
    while (s < len) {
      const Matrix j = map.jacobian_matrix(x);
      if (reciprocal_condition(j) < options.singular_rcond) {
        return fail(LiftStatus::StepFailure, x, "Jacobian numerically singular along the lift");
      }
      const double ds = std::min(h, len - s);
      const Point y_next = ya + ((s + ds) / len) * (yb - ya);

      // Predictor: linearised step toward y_next. Corrector: Newton at fixed
      // target, accepted only if it contracts and stays near the prediction.
      const Point predicted = x + j.partialPivLu().solve(y_next - map.evaluate(x));
      const double predicted_len = (predicted - x).norm();
      Point xc = predicted;
      bool ok = false;
      double last_step = std::numeric_limits<double>::infinity();
      for (int it = 0; it < 8; ++it) {
        const Point r = map.evaluate(xc) - y_next;
        if (!r.allFinite()) break;
        if (r.norm() <= options.tol) {
          ok = true;
          break;
        }
        const Point d = map.jacobian_matrix(xc).partialPivLu().solve(-r);
        const double step_len = d.norm();
        if (!d.allFinite() || step_len > 0.5 * last_step + 1e-14 * (1.0 + xc.norm())) break;
        last_step = step_len;
        xc += d;
      }
      if (ok && (xc - predicted).norm() > 0.5 * predicted_len + 1e-12 * (1.0 + x.norm())) ok = false;

      if (!ok) {
        h *= 0.5;
        if (h < options.min_step) {
          return fail(LiftStatus::StepFailure, x, "corrector failed at minimum step");
        }
        continue;
      }
      x = xc;
      s += ds;
      path.target_nodes.push_back(y_next);
      path.lifted_nodes.push_back(x);
      if (options.box && !options.box->contains(x)) {
        return fail(LiftStatus::EscapedBox, x, "lift left the box");
      }
      h = std::min(options.step, 2.0 * h);
    }
  }
  path.status = LiftStatus::Complete;
  return path;
}

bool AffineSubspace::contains(const Point& y, double tol) const {
  const Point d = y - base;
  return (d - basis * (basis.transpose() * d)).norm() <= tol;
}

std::string_view to_string(Connectivity c) {
  switch (c) {
    case Connectivity::Connected: return "connected";
    case Connectivity::NotFound: return "not-found";
    case Connectivity::DisconnectedEvidence: return "disconnected-evidence";
  }
  return "unknown";
}

}  // namespace invertlab
