#include "invertlab/section.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace invertlab {

namespace {

using V3 = Eigen::Vector3d;

// Minimal rotation taking unit a to unit b, applied to v.
V3 transport(const V3& a, const V3& b, const V3& v) {
  const V3 k = a.cross(b);
  const double c = a.dot(b);
  if (1.0 + c < 1e-14) return v;  // antipodal, never happens on a mesh edge
  return v * c + k.cross(v) + k * (k.dot(v)) / (1.0 + c);
}

// Signed rotation of the field from a to b relative to parallel transport.
double edge_delta(const V3& a, const V3& va, const V3& b, const V3& vb) {
  const V3 t = transport(a, b, va);
  return std::atan2(b.dot(t.cross(vb)), t.dot(vb));
}

// Signed solid angle of the spherical triangle abc.
double solid_angle(const V3& a, const V3& b, const V3& c) {
  return 2.0 * std::atan2(a.dot(b.cross(c)), 1.0 + a.dot(b) + b.dot(c) + c.dot(a));
}

V3 tangent_part(const V3& p, const V3& v) { return v - v.dot(p) * p; }

struct EdgeRotation {
  double delta = 0.0;
  double max_step = 0.0;
  int depth = 0;
  bool resolved = true;
};

class IndexEngine {
 public:
  IndexEngine(const std::function<Point(const Point&)>& field, const IndexOptions& options)
      : field_(field), options_(options) {}

  V3 sample(const V3& p) const {
    const Point x = p;
    const Point v = field_(x);
    if (v.size() < 3) throw PreconditionError("index field must return vectors in R^3");
    return tangent_part(p, v.head<3>());
  }

  EdgeRotation rotate(const V3& a, const V3& va, const V3& b, const V3& vb, int depth, int detours = 2) const {
    const double d = edge_delta(a, va, b, vb);
    if (std::abs(d) <= options_.max_edge_rotation) return {d, std::abs(d), depth, true};
    if (!field_) return {d, std::abs(d), depth, false};
    if (depth >= options_.max_depth) {
      // A zero sits on or next to this piece of edge. Go around it through
      // a point on either side; the loop holonomy is added back so the
      // rotation still refers to the geodesic.
      if (detours == 0) return {d, std::abs(d), depth, false};
      const V3 n = a.cross(b).normalized();
      const V3 m = (a + b).normalized();
      EdgeRotation best{d, std::abs(d), depth, false};
      for (double side : {1.0, -1.0}) {
        const V3 w = (m + side * 0.5 * (b - a).norm() * n).normalized();
        const V3 vw = sample(w);
        if (vw.norm() <= options_.zero_tol) continue;
        const EdgeRotation l = rotate(a, va, w, vw, depth - 2, detours - 1);
        const EdgeRotation r = rotate(w, vw, b, vb, depth - 2, detours - 1);
        if (l.resolved && r.resolved) {
          return {l.delta + r.delta + solid_angle(a, w, b), std::max(l.max_step, r.max_step),
                  std::max(l.depth, r.depth) + 1, true};
        }
      }
      return best;
    }
    const V3 m = (a + b).normalized();
    V3 vm = sample(m);
    if (vm.norm() <= options_.zero_tol) vm = sample((m + 1e-7 * (b - a)).normalized());
    const EdgeRotation l = rotate(a, va, m, vm, depth + 1, detours);
    const EdgeRotation r = rotate(m, vm, b, vb, depth + 1, detours);
    return {l.delta + r.delta, std::max(l.max_step, r.max_step), std::max(l.depth, r.depth),
            l.resolved && r.resolved};
  }

  bool has_field() const { return static_cast<bool>(field_); }

 private:
  const std::function<Point(const Point&)>& field_;
  IndexOptions options_;
};

}  // namespace

IndexReport index_sum(const std::vector<Point>& positions, const std::vector<Point>& vectors,
                      const std::vector<Triangle>& faces, int level, const std::function<Point(const Point&)>& field,
                      const IndexOptions& options) {
  if (positions.size() != vectors.size()) throw PreconditionError("index_sum: positions and vectors differ in size");
  IndexReport report;
  report.level = level;
  const IndexEngine engine(field, options);

  std::vector<V3> p(positions.size()), v(positions.size());
  std::size_t zero_samples = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i].size() < 3 || vectors[i].size() < 3) throw PreconditionError("index_sum needs R^3 samples");
    p[i] = positions[i].head<3>().normalized();
    v[i] = tangent_part(p[i], vectors[i].head<3>());
    if (v[i].norm() <= options.zero_tol) {
      if (engine.has_field()) {
        // Push the sample off the zero; the zero then sits inside a cell.
        const V3 off = (std::abs(p[i][0]) < 0.9 ? V3::UnitX() : V3::UnitY()).cross(p[i]).normalized();
        v[i] = engine.sample((p[i] + 1e-7 * off).normalized());
        v[i] = tangent_part(p[i], v[i]);
      }
      if (v[i].norm() <= options.zero_tol) ++zero_samples;
    }
  }
  if (zero_samples > 0) {
    report.resolved = false;
    report.flags.push_back("zero at " + std::to_string(zero_samples) + " sample(s); resolution insufficient");
  }

  std::map<std::pair<int, int>, EdgeRotation> edges;
  std::size_t unresolved_edges = 0;
  auto edge = [&](int a, int b) {
    const bool flip = a > b;
    const auto key = std::minmax(a, b);
    auto it = edges.find(key);
    if (it == edges.end()) {
      const auto ka = static_cast<std::size_t>(key.first), kb = static_cast<std::size_t>(key.second);
      EdgeRotation r = engine.rotate(p[ka], v[ka], p[kb], v[kb], 0);
      report.max_edge_rotation = std::max(report.max_edge_rotation, r.max_step);
      if (!r.resolved) ++unresolved_edges;
      it = edges.emplace(key, r).first;
    }
    EdgeRotation r = it->second;
    if (flip) r.delta = -r.delta;
    return r;
  };

  int sum = 0;
  for (Triangle t : faces) {
    const auto at = [&](int k) { return p[static_cast<std::size_t>(t[k])]; };
    if ((at(1) - at(0)).cross(at(2) - at(0)).dot(at(0) + at(1) + at(2)) < 0.0) std::swap(t[1], t[2]);
    const EdgeRotation e0 = edge(t[0], t[1]), e1 = edge(t[1], t[2]), e2 = edge(t[2], t[0]);
    const double total = e0.delta + e1.delta + e2.delta + solid_angle(at(0), at(1), at(2));
    const int index = static_cast<int>(std::lround(total / (2.0 * M_PI)));
    sum += index;
    if (index != 0) {
      ZeroCell z;
      for (int k = 0; k < 3; ++k) z.corners[static_cast<std::size_t>(k)] = Point(at(k));
      z.index = index;
      z.depth = std::max({e0.depth, e1.depth, e2.depth});
      report.zeros.push_back(std::move(z));
    }
  }
  report.index_sum = sum;
  if (unresolved_edges > 0) {
    report.resolved = false;
    report.flags.push_back("field turns more than " + std::to_string(options.max_edge_rotation) + " rad along " +
                           std::to_string(unresolved_edges) + " edge(s); resolution insufficient");
  }
  return report;
}

IndexReport index_sum(const SectionField& section, const PlaneFamily& family, const IndexOptions& options) {
  if (family.kind != FamilyKind::Icosphere) throw PreconditionError("index_sum needs an icosphere family");
  if (section.samples.size() != family.size()) throw PreconditionError("section and family differ in size");
  if (!section.complete()) {
    IndexReport r;
    r.level = family.level;
    r.resolved = false;
    r.flags.push_back("section incomplete (" + std::to_string(section.ok_count()) + "/" +
                      std::to_string(section.samples.size()) + " samples ok); index sum not computed");
    return r;
  }
  std::vector<Point> vectors;
  for (const auto& s : section.samples) vectors.push_back(s.vector.head(3));
  return index_sum(family.samples, vectors, family.faces, family.level, {}, options);
}

int winding_number(const std::function<std::complex<double>(std::complex<double>)>& f, std::complex<double> center,
                   double radius, int samples) {
  if (samples < 8) throw PreconditionError("winding_number needs at least 8 samples");
  double total = 0.0;
  std::complex<double> prev = f(center + radius);
  if (std::abs(prev) == 0.0) throw NumericalError("function vanishes on the winding circle");
  for (int k = 1; k <= samples; ++k) {
    const double t = 2.0 * M_PI * k / samples;
    const std::complex<double> cur = f(center + std::polar(radius, t));
    if (std::abs(cur) == 0.0) throw NumericalError("function vanishes on the winding circle");
    total += std::arg(cur / prev);
    prev = cur;
  }
  return static_cast<int>(std::lround(total / (2.0 * M_PI)));
}

int tautological_euler(int samples) {
  // Near alpha = infinity the line is spanned by e(zeta) = (zeta, 1); the
  // section xi = (1, 1/zeta) has coefficient <e, xi> / |e|^2 in that frame.
  // xi never vanishes for finite alpha, so only this chart contributes.
  const auto coefficient = [](std::complex<double> zeta) {
    const Eigen::Vector2cd e(zeta, 1.0);
    const Eigen::Vector2cd xi(1.0, 1.0 / zeta);
    return e.dot(xi) / e.squaredNorm();
  };
  return winding_number(coefficient, 0.0, 0.5, samples);
}

Rp1ParityReport rp1_parity(const std::vector<Rp1Sample>& samples, double zero_tol) {
  const std::size_t n = samples.size();
  if (n < 3) throw PreconditionError("rp1_parity needs at least three samples");
  Rp1ParityReport r;
  Eigen::VectorXd prev;
  Eigen::VectorXd first;
  for (std::size_t k = 0; k < n; ++k) {
    const auto& s = samples[k];
    if (s.line.size() != s.section.size()) throw PreconditionError("line and section dimensions differ");
    const double ln = s.line.norm();
    if (!(ln > 0.0) || s.line.imag().norm() > 1e-8 * ln) {
      throw PreconditionError("sample " + std::to_string(k) + ": line is not real");
    }
    Eigen::VectorXd b = s.line.real() / ln;
    b.normalize();
    if (k > 0 && b.dot(prev) < 0.0) b = -b;
    const double sn = s.section.norm();
    if (s.section.imag().norm() > 1e-8 * std::max(1.0, sn)) {
      throw PreconditionError("sample " + std::to_string(k) + ": section is not real");
    }
    const double c = s.section.real().dot(b);
    if ((s.section.real() - c * b).norm() > 1e-8 * std::max(1.0, sn)) {
      throw PreconditionError("sample " + std::to_string(k) + ": section leaves its line");
    }
    r.coefficients.push_back(c);
    if (std::abs(c) <= zero_tol) r.zero_samples.push_back(static_cast<int>(k));
    if (k == 0) first = b;
    prev = b;
  }
  r.holonomy_flip = prev.dot(first) < 0.0;

  // Sign changes around the loop, skipping zero samples.
  std::vector<int> nz;
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(r.coefficients[k]) > zero_tol) nz.push_back(static_cast<int>(k));
  }
  for (std::size_t i = 0; i < nz.size(); ++i) {
    const int a = nz[i];
    const bool wrap = i + 1 == nz.size();
    const int b = wrap ? nz[0] : nz[i + 1];
    double cb = r.coefficients[static_cast<std::size_t>(b)];
    if (wrap && r.holonomy_flip) cb = -cb;
    if (nz.size() == 1 && !r.holonomy_flip) break;
    if (r.coefficients[static_cast<std::size_t>(a)] * cb < 0.0) {
      ++r.sign_changes;
      r.zero_intervals.emplace_back(a, b);
    }
  }
  r.odd = r.sign_changes % 2 == 1;
  return r;
}

ContinuityReport continuity_diagnostic(const SectionField& field, const PlaneFamily& family,
                                       const SectionField* refined) {
  auto measure = [&](const SectionField& f, double& max_angle, double& max_jump) {
    max_angle = 0.0;
    max_jump = 0.0;
    for (const auto& [i, j] : family.edges) {
      const auto& a = f.samples[static_cast<std::size_t>(i)];
      const auto& b = f.samples[static_cast<std::size_t>(j)];
      if (a.status != SampleStatus::Ok || b.status != SampleStatus::Ok) continue;
      const double na = a.vector.norm(), nb = b.vector.norm();
      const double c = std::clamp(a.vector.dot(b.vector) / (na * nb), -1.0, 1.0);
      max_angle = std::max(max_angle, std::acos(c) * 180.0 / M_PI);
      max_jump = std::max(max_jump, std::abs(na - nb) / std::max(na, nb));
    }
  };
  if (field.samples.size() != family.size()) throw PreconditionError("section and family differ in size");
  ContinuityReport r;
  r.complete = field.complete();
  measure(field, r.max_angle_deg, r.max_relative_jump);
  if (refined) {
    if (refined->samples.size() != family.size()) throw PreconditionError("refined section differs in size");
    double a = 0.0, j = 0.0;
    measure(*refined, a, j);
    r.refined_max_angle_deg = a;
    if (a < 0.9 * r.max_angle_deg) {
      r.trend = "decreasing";
    } else if (a > 1.1 * r.max_angle_deg) {
      r.trend = "increasing";
    } else {
      r.trend = "stable";
    }
  }
  return r;
}

nlohmann::json to_json(const IndexReport& r) {
  nlohmann::json zeros = nlohmann::json::array();
  for (const auto& z : r.zeros) {
    nlohmann::json corners = nlohmann::json::array();
    for (const auto& c : z.corners) corners.push_back(std::vector<double>(c.data(), c.data() + c.size()));
    zeros.push_back({{"corners", corners}, {"index", z.index}, {"depth", z.depth}});
  }
  return {{"index_sum", r.index_sum},
          {"level", r.level},
          {"resolved", r.resolved},
          {"max_edge_rotation", r.max_edge_rotation},
          {"flags", r.flags},
          {"zeros", zeros}};
}

}  // namespace invertlab
