#include "invertlab/section.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace invertlab {

namespace {

nlohmann::json point_json(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

nlohmann::json plane_json(const Plane& pl) {
  nlohmann::json tangent = nlohmann::json::array(), normal = nlohmann::json::array();
  for (Eigen::Index c = 0; c < pl.tangent.cols(); ++c) tangent.push_back(point_json(pl.tangent.col(c)));
  for (Eigen::Index c = 0; c < pl.normal.cols(); ++c) normal.push_back(point_json(pl.normal.col(c)));
  return {{"base", point_json(pl.base)}, {"tangent", tangent}, {"normal", normal}};
}

// s = P_pi DF(x) g, with the projection residual recorded.
void finish_vector(SectionSample& s, const MapSpec& map, const Point& x, const Point& grad) {
  const Point raw = map.jacobian_matrix(x) * grad;
  const Point proj = s.plane.project_vector(raw);
  const double nr = raw.norm();
  if (!(nr > 0.0) || !std::isfinite(nr)) {
    s.status = SampleStatus::SolverFailed;
    s.diagnostic = "gradient vanishes at the marked vertex";
    return;
  }
  s.projection_residual = (raw - proj).norm() / nr;
  s.vector = proj;
  s.status = SampleStatus::Ok;
}

std::vector<int> remap_loop(const std::vector<int>& loop, const std::vector<int>& remap) {
  std::vector<int> out;
  for (int v : loop) {
    const int r = remap[static_cast<std::size_t>(v)];
    if (r < 0) return {};
    out.push_back(r);
  }
  return out;
}

Plane at_base(const Plane& linear, const Point& q) {
  Plane p = linear;
  p.base = q;
  return p;
}

void check_fiber(const MapSpec& map, const Point& q, const Point& p, const std::string& name) {
  const double r = (map.evaluate(p) - q).norm();
  if (r > 1e-8 * (1.0 + q.norm())) {
    throw PreconditionError(name + " is not a fiber point of q (residual " + std::to_string(r) + ")");
  }
}

SectionSample condenser_sample(const MapSpec& map, const Point& q, const std::vector<Point>& pts,
                               const Plane& plane, const SectionParams& params, int id) {
  SectionSample s;
  s.id = id;
  s.plane = plane;
  SurfaceMesh mesh;
  try {
    TraceOptions opt = params.trace;
    opt.seed_labels = {"p1", "p2", "p3"};
    mesh = trace_preimage(map, plane, {pts[0], pts[1], pts[2]}, params.R, params.h, opt);
  } catch (const Error& e) {
    s.status = SampleStatus::TraceFailed;
    s.diagnostic = e.what();
    return s;
  }
  s.details["trace"] = {{"vertices", mesh.vertex_count()},
                        {"triangles", mesh.triangle_count()},
                        {"max_residual", mesh.max_residual()},
                        {"min_angle_deg", mesh.min_angle_deg()},
                        {"topology", to_json(mesh_topology(mesh))}};

  CondenserDomain dom;
  try {
    dom = mark_condenser_boundaries(mesh, map, q, {pts[0], pts[1]}, params.ball_radius);
  } catch (const Error& e) {
    s.status = SampleStatus::EndsNotDisc;
    s.diagnostic = e.what();
    return s;
  }
  s.details["patch_sizes"] = dom.patch_sizes;

  const auto p3 = dom.mesh.marked_vertex("p3");
  if (!p3) {
    s.status = SampleStatus::EndsNotDisc;
    s.diagnostic = "p3 lost when cutting the condenser";
    return s;
  }
  std::vector<int> remap;
  const SurfaceMesh comp = extract_component(dom.mesh, *p3, &remap);
  const std::vector<int> t1 = remap_loop(dom.rims[0], remap), t2 = remap_loop(dom.rims[1], remap);
  if (t1.empty() || t2.empty()) {
    s.status = SampleStatus::EndsNotDisc;
    s.diagnostic = "p3 and the condenser rims lie in different components";
    return s;
  }
  try {
    const HarmonicField f = solve_condenser(comp, t1, t2);
    const int v3 = *comp.marked_vertex("p3");
    s.details["capacity"] = f.energy;
    s.details["negative_weights"] = f.negative_weights;
    s.details["max_principle_violation"] = f.max_principle_violation();
    finish_vector(s, map, pts[2], gradient_at(f, v3));
  } catch (const Error& e) {
    s.status = SampleStatus::SolverFailed;
    s.diagnostic = e.what();
  }
  return s;
}

SectionSample log_sample(const MapSpec& map, const Point& q, const Point& a, const Point& b, const Plane& plane,
                         const SectionParams& params, const std::vector<double>& radii, int id) {
  SectionSample s;
  s.id = id;
  s.plane = plane;
  SurfaceMesh mesh;
  try {
    TraceOptions opt = params.trace;
    opt.seed_labels = {"a", "b"};
    mesh = trace_preimage(map, plane, {a, b}, radii.back(), params.h, opt);
  } catch (const Error& e) {
    s.status = SampleStatus::TraceFailed;
    s.diagnostic = e.what();
    return s;
  }
  s.details["trace"] = {{"vertices", mesh.vertex_count()},
                        {"triangles", mesh.triangle_count()},
                        {"max_residual", mesh.max_residual()},
                        {"topology", to_json(mesh_topology(mesh))}};
  CondenserDomain dom;
  try {
    dom = mark_condenser_boundaries(mesh, map, q, {a}, params.ball_radius);
  } catch (const Error& e) {
    s.status = SampleStatus::EndsNotDisc;
    s.diagnostic = e.what();
    return s;
  }

  std::vector<ExhaustionLevel> levels;
  for (double r : radii) {
    std::vector<int> clip_map, comp_map;
    const SurfaceMesh clipped = clip_to_ball(dom.mesh, r, &clip_map);
    const auto bv = clipped.marked_vertex("b");
    std::vector<int> rim = remap_loop(dom.rims[0], clip_map);
    if (!bv || rim.empty()) {
      s.status = SampleStatus::EndsNotDisc;
      s.diagnostic = "b or the rim of U falls outside the truncation radius " + std::to_string(r);
      return s;
    }
    SurfaceMesh comp = extract_component(clipped, *bv, &comp_map);
    rim = remap_loop(rim, comp_map);
    if (rim.empty()) {
      s.status = SampleStatus::EndsNotDisc;
      s.diagnostic = "b and the rim of U lie in different components";
      return s;
    }
    const int b_new = *comp.marked_vertex("b");
    levels.push_back({std::move(comp), std::move(rim), b_new, r});
  }
  try {
    const LogNormalizedResult res = solve_log_normalized(levels);
    nlohmann::json lv = nlohmann::json::array();
    std::vector<double> caps;
    for (const auto& l : res.levels) {
      lv.push_back({{"radius", l.radius},
                    {"raw_value_at_b", l.raw_value_at_b},
                    {"capacity", l.capacity},
                    {"gradient_norm_at_b", l.gradient_at_b.norm()},
                    {"cauchy_difference", l.cauchy_difference}});
      caps.push_back(l.capacity);
    }
    s.details["exhaustion"] = lv;
    if (radii.size() >= 3) s.conformal = classify_capacities(radii, caps);
    finish_vector(s, map, b, res.levels.back().gradient_at_b);
  } catch (const Error& e) {
    s.status = SampleStatus::SolverFailed;
    s.diagnostic = e.what();
  }
  return s;
}

}  // namespace

std::string_view to_string(SampleStatus s) {
  switch (s) {
    case SampleStatus::Ok: return "ok";
    case SampleStatus::TraceFailed: return "trace-failed";
    case SampleStatus::EndsNotDisc: return "ends-not-disc";
    case SampleStatus::SolverFailed: return "solver-failed";
  }
  return "unknown";
}

std::size_t SectionField::ok_count() const {
  return static_cast<std::size_t>(
      std::count_if(samples.begin(), samples.end(), [](const SectionSample& s) { return s.status == SampleStatus::Ok; }));
}

double SectionField::max_tangency_error() const {
  double m = 0.0;
  for (const auto& s : samples) {
    if (s.status != SampleStatus::Ok || s.plane.normal.cols() == 0) continue;
    const double n = s.vector.norm();
    m = std::max(m, (s.plane.normal.transpose() * s.vector).cwiseAbs().maxCoeff() / n);
  }
  return m;
}

SectionField build_condenser_section(const MapSpec& map, const Point& q, const std::vector<Point>& fiber_points,
                                     const PlaneFamily& family, const SectionParams& params) {
  if (fiber_points.size() < 3) {
    throw PreconditionError("the condenser section needs three distinct fiber points p1, p2, p3 of q; got " +
                            std::to_string(fiber_points.size()));
  }
  for (std::size_t i = 0; i < 3; ++i) {
    check_fiber(map, q, fiber_points[i], "p" + std::to_string(i + 1));
    for (std::size_t j = 0; j < i; ++j) {
      if ((fiber_points[i] - fiber_points[j]).norm() < 1e-8) throw PreconditionError("fiber points must be distinct");
    }
  }
  SectionField field;
  field.construction = "condenser";
  field.samples.resize(family.size());
  parallel_for(family.size(), params.jobs, [&](std::size_t i) {
    field.samples[i] = condenser_sample(map, q, fiber_points, at_base(family.planes[i], q), params, static_cast<int>(i));
  });
  nlohmann::json pts = nlohmann::json::array();
  for (std::size_t i = 0; i < 3; ++i) pts.push_back(point_json(fiber_points[i]));
  field.provenance = {{"map", map.name()},
                      {"q", point_json(q)},
                      {"fiber_points", pts},
                      {"ball_radius", params.ball_radius},
                      {"R", params.R},
                      {"h", params.h > 0.0 ? params.h : params.R / 64.0},
                      {"family", std::string(to_string(family.kind))},
                      {"level", family.level}};
  return field;
}

SectionField build_log_section(const MapSpec& map, const Point& q, const Point& a, const Point& b,
                               const PlaneFamily& family, const SectionParams& params) {
  check_fiber(map, q, a, "a");
  check_fiber(map, q, b, "b");
  if ((a - b).norm() < 1e-8) {
    throw PreconditionError("the log section needs two distinct points a, b with F(a) = F(b) = q");
  }
  std::vector<double> radii = params.exhaustion_radii;
  if (radii.empty()) radii = {0.5 * params.R, 0.75 * params.R, params.R};
  std::sort(radii.begin(), radii.end());

  SectionField field;
  field.construction = "log";
  field.samples.resize(family.size());
  parallel_for(family.size(), params.jobs, [&](std::size_t i) {
    field.samples[i] = log_sample(map, q, a, b, at_base(family.planes[i], q), params, radii, static_cast<int>(i));
  });
  field.provenance = {{"map", map.name()},
                      {"q", point_json(q)},
                      {"fiber_points", {point_json(a), point_json(b)}},
                      {"ball_radius", params.ball_radius},
                      {"exhaustion_radii", radii},
                      {"h", params.h > 0.0 ? params.h : radii.back() / 64.0},
                      {"family", std::string(to_string(family.kind))},
                      {"level", family.level}};
  return field;
}

SectionField build_condenser_section_direct(const MapSpec& map, const Point& q, const PlaneFamily& family,
                                            const CondenserMeshProvider& provider, unsigned jobs) {
  SectionField field;
  field.construction = "condenser";
  field.samples.resize(family.size());
  parallel_for(family.size(), jobs, [&](std::size_t i) {
    SectionSample s;
    s.id = static_cast<int>(i);
    s.plane = at_base(family.planes[i], q);
    try {
      const CondenserMeshSpec spec = provider(s.plane, i);
      const HarmonicField f = solve_condenser(spec.mesh, spec.t1, spec.t2);
      s.details["capacity"] = f.energy;
      finish_vector(s, map, spec.mesh.vertex(spec.p3), gradient_at(f, spec.p3));
    } catch (const Error& e) {
      s.status = SampleStatus::SolverFailed;
      s.diagnostic = e.what();
    }
    field.samples[i] = std::move(s);
  });
  field.provenance = {{"map", map.name()}, {"q", point_json(q)}, {"mode", "direct-mesh"}};
  return field;
}

SectionField build_log_section_direct(const MapSpec& map, const Point& q, const PlaneFamily& family,
                                      const LogMeshProvider& provider, unsigned jobs) {
  SectionField field;
  field.construction = "log";
  field.samples.resize(family.size());
  parallel_for(family.size(), jobs, [&](std::size_t i) {
    SectionSample s;
    s.id = static_cast<int>(i);
    s.plane = at_base(family.planes[i], q);
    try {
      const std::vector<ExhaustionLevel> levels = provider(s.plane, i);
      const LogNormalizedResult res = solve_log_normalized(levels);
      std::vector<double> radii, caps;
      for (const auto& l : res.levels) {
        radii.push_back(l.radius);
        caps.push_back(l.capacity);
      }
      if (radii.size() >= 3) s.conformal = classify_capacities(radii, caps);
      const ExhaustionLevel& last = levels.back();
      finish_vector(s, map, last.mesh.vertex(last.b), res.levels.back().gradient_at_b);
    } catch (const Error& e) {
      s.status = SampleStatus::SolverFailed;
      s.diagnostic = e.what();
    }
    field.samples[i] = std::move(s);
  });
  field.provenance = {{"map", map.name()}, {"q", point_json(q)}, {"mode", "direct-mesh"}};
  return field;
}

nlohmann::json to_json(const SectionField& field) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : field.samples) {
    nlohmann::json j = {{"id", s.id},
                        {"status", std::string(to_string(s.status))},
                        {"plane", plane_json(s.plane)},
                        {"vector", s.status == SampleStatus::Ok ? point_json(s.vector) : nlohmann::json(nullptr)},
                        {"projection_residual", s.projection_residual},
                        {"details", s.details}};
    if (!s.diagnostic.empty()) j["diagnostic"] = s.diagnostic;
    if (s.conformal) j["conformal_type"] = to_json(*s.conformal);
    samples.push_back(std::move(j));
  }
  return {{"construction", field.construction},
          {"provenance", field.provenance},
          {"ok", field.ok_count()},
          {"total", field.samples.size()},
          {"samples", samples}};
}

}  // namespace invertlab
