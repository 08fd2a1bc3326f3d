#include "invertlab/commands.hpp"

#include "invertlab/fiber.hpp"
#include "invertlab/harmonic.hpp"
#include "invertlab/mesh_builders.hpp"
#include "invertlab/section.hpp"
#include "invertlab/spectral.hpp"
#include "invertlab/tracer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace invertlab {

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::size_t kIdentitySamples = 50;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

nlohmann::json vec(const Point& p) { return std::vector<double>(p.data(), p.data() + p.size()); }

std::string row(const Point& p) {
  std::string s;
  for (Eigen::Index i = 0; i < p.size(); ++i) s += "," + format_double(p[i]);
  return s;
}

struct Context {
  const RunConfig& config;
  RunReport& report;
  std::filesystem::path out;
  MapSpec map;

  int n() const { return map.dimension(); }

  Point q() const {
    if (config.q.empty()) throw ConfigError("target q is required (--q or [target] q)");
    if (config.q.size() != static_cast<std::size_t>(n())) {
      throw ConfigError("q has " + std::to_string(config.q.size()) + " coordinates, " + map.name() + " needs " +
                        std::to_string(n()));
    }
    return Eigen::Map<const Point>(config.q.data(), n());
  }

  double trace_radius() const {
    if (config.radii.empty()) return 10.0;
    for (double r : config.radii) {
      if (!(r > 0.0)) throw ConfigError("radii must be positive");
    }
    return *std::max_element(config.radii.begin(), config.radii.end());
  }

  Plane plane(const Point& q) const {
    if (config.plane.empty()) return Plane::coordinate(q, 0, 1);
    if (config.plane.size() != 2 * static_cast<std::size_t>(n())) {
      throw ConfigError("plane needs two vectors of " + std::to_string(n()) + " coordinates");
    }
    Matrix span(n(), 2);
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < n(); ++i) span(i, c) = config.plane[static_cast<std::size_t>(c * n() + i)];
    }
    if (std::abs(span.col(0).normalized().dot(span.col(1).normalized())) > 1.0 - 1e-12) {
      throw ConfigError("plane vectors are parallel");
    }
    return Plane::from_span(q, span);
  }

  void artifact(const std::string& rel, const std::string& text) {
    write_text_file(out, rel, text);
    report.add_artifact(out, rel);
  }

  /// Fiber points from the config, or searched for in the box.
  std::vector<Point> fiber(const Point& q) {
    const auto t0 = Clock::now();
    std::vector<Point> pts;
    if (!config.points.empty()) {
      if (config.points.size() % static_cast<std::size_t>(n()) != 0) {
        throw ConfigError("points must be a multiple of " + std::to_string(n()) + " numbers");
      }
      nlohmann::json j = nlohmann::json::array();
      for (std::size_t k = 0; k < config.points.size(); k += static_cast<std::size_t>(n())) {
        const Point x = Eigen::Map<const Point>(config.points.data() + k, n());
        const double res = (map.evaluate(x) - q).norm();
        if (res > 1e-8 * (1.0 + q.norm())) {
          throw PreconditionError("supplied point " + std::to_string(pts.size()) +
                                  " is not in the fiber: |F(x) - q| = " + format_double(res));
        }
        j.push_back({{"x", vec(x)}, {"residual", res}});
        pts.push_back(x);
      }
      report.add_stage("fiber", {{"source", "config"}, {"points", j}, {"count", pts.size()}}, since(t0));
      return pts;
    }
    FiberOptions o;
    o.n_starts = config.starts;
    o.tol = config.solve_tol;
    if (config.dedup_tol > 0.0) o.dedup_radius = config.dedup_tol;
    o.seed = config.seed;
    o.jobs = config.jobs;
    const FiberReport fr = enumerate_fiber(map, q, make_box(config.box, n()), o);
    nlohmann::json j = to_json(fr, &map);
    j["source"] = "search";
    report.add_stage("fiber", std::move(j), since(t0));
    for (const auto& p : fr.points) pts.push_back(p.x);
    return pts;
  }

  void write_mesh(const SurfaceMesh& mesh, const std::string& stem) {
    std::ostringstream off;
    write_off(mesh, off);
    artifact(stem + ".off", off.str());
    artifact(stem + ".json", mesh_sidecar(mesh).dump(2) + "\n");
  }

  void write_field(const HarmonicField& f) {
    std::string values = "vertex,value\n";
    for (Eigen::Index v = 0; v < f.values.size(); ++v) values += std::to_string(v) + "," + format_double(f.values[v]) + "\n";
    artifact("field.csv", values);
    std::string grads = "face";
    for (int i = 0; i < f.mesh->dimension(); ++i) grads += ",g" + std::to_string(i + 1);
    grads += "\n";
    for (std::size_t t = 0; t < f.face_gradients.size(); ++t) grads += std::to_string(t) + row(f.face_gradients[t]) + "\n";
    artifact("gradients.csv", grads);
  }
};

nlohmann::json field_json(const HarmonicField& f) {
  return {{"vertices", f.mesh->vertex_count()},
          {"triangles", f.mesh->triangle_count()},
          {"capacity", f.energy},
          {"relative_residual", f.relative_residual},
          {"max_principle_violation", f.max_principle_violation()},
          {"negative_weights", f.negative_weights},
          {"solver", f.solver},
          {"boundary", f.boundary_description}};
}

std::string cmd_fiber(Context& c, int& code) {
  const Point q = c.q();
  const auto pts = c.fiber(q);
  std::string csv = "index";
  for (int i = 0; i < c.n(); ++i) csv += ",x" + std::to_string(i + 1);
  csv += ",residual\n";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    csv += std::to_string(k) + row(pts[k]) + "," + format_double((c.map.evaluate(pts[k]) - q).norm()) + "\n";
  }
  c.artifact("fiber_points.csv", csv);
  code = kExitOk;
  return std::to_string(pts.size()) + " fiber point(s) of q for " + c.map.name();
}

std::string cmd_trace(Context& c, int& code) {
  const Point q = c.q();
  const double R = c.trace_radius();
  std::vector<Point> seeds;
  for (const auto& p : c.fiber(q)) {
    if (p.norm() < R) seeds.push_back(p);
  }
  if (seeds.empty()) {
    throw PreconditionError("no seed: no fiber point of q lies inside the trace ball of radius " + format_double(R) +
                            "; supply one with --points or widen --box");
  }
  const auto t0 = Clock::now();
  TraceOptions o;
  o.tol = c.config.mesh_tol;
  const SurfaceMesh mesh = trace_preimage(c.map, c.plane(q), seeds, R, c.config.h, o);
  const TopologyReport topo = mesh_topology(mesh);
  c.report.add_stage("trace",
                     {{"radius", R},
                      {"h", c.config.h > 0.0 ? c.config.h : R / 64.0},
                      {"seeds", seeds.size()},
                      {"vertices", mesh.vertex_count()},
                      {"triangles", mesh.triangle_count()},
                      {"topology", to_json(topo)}},
                     since(t0));
  c.write_mesh(mesh, "mesh");
  code = kExitOk;
  return std::to_string(mesh.vertex_count()) + " vertices, " + std::to_string(topo.component_count()) +
         " component(s), chi = " + std::to_string(topo.euler_characteristic());
}

std::string cmd_condenser(Context& c, int& code) {
  const std::string& src = c.config.mesh_source;
  const auto t0 = Clock::now();
  if (src.rfind("annulus:", 0) == 0) {
    const auto nums = parse_number_list(src.substr(8), "mesh.source");
    if (nums.empty() || nums.size() > 2 || !(nums[0] > 0.0 && nums[0] < 1.0)) {
      throw ConfigError("mesh.source: expected annulus:<a>[:<h>] with 0 < a < 1");
    }
    const double a = nums[0], h = nums.size() == 2 ? nums[1] : 0.026;
    const SurfaceMesh mesh = flat_annulus_uniform(a, 1.0, h);
    const auto loops = loops_by_radius(mesh, Point::Zero(2));
    const HarmonicField f = solve_condenser(mesh, loops[0], loops[1]);
    double err = 0.0;
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
      const double r = mesh.vertex(static_cast<int>(v)).norm();
      err = std::max(err, std::abs(f.values[static_cast<Eigen::Index>(v)] - (std::log(a) - std::log(r)) / std::log(a)));
    }
    const double cap = 2.0 * M_PI / std::log(1.0 / a);
    const double cap_err = std::abs(f.energy - cap) / cap;
    const bool pass = err <= 2e-2 && cap_err <= 0.02;
    nlohmann::json j = field_json(f);
    j["closed_form"] = {{"max_nodal_error", err},
                        {"capacity_expected", cap},
                        {"capacity_relative_error", cap_err},
                        {"pass", pass}};
    c.report.add_stage("condenser", std::move(j), since(t0));
    c.write_mesh(mesh, "mesh");
    c.write_field(f);
    code = pass ? kExitOk : kExitNumerical;
    return std::string("annulus a = ") + format_double(a) + ": max nodal error " + format_double(err) +
           ", capacity " + format_double(f.energy) + (pass ? " PASS" : " FAIL");
  }
  if (!src.empty()) {
    std::ifstream in(src);
    if (!in) throw ConfigError("cannot open mesh " + src);
    const SurfaceMesh mesh = read_off(in);
    const auto& loops = mesh.boundary_loops();
    if (loops.size() != 2) {
      throw PreconditionError("condenser mesh needs exactly two boundary loops, found " + std::to_string(loops.size()));
    }
    const HarmonicField f = solve_condenser(mesh, loops[0], loops[1]);
    c.report.add_stage("condenser", field_json(f), since(t0));
    c.write_field(f);
    code = kExitOk;
    return "capacity " + format_double(f.energy);
  }
  const Point q = c.q();
  const double R = c.trace_radius();
  std::vector<Point> pts;
  for (const auto& p : c.fiber(q)) {
    if (p.norm() < R) pts.push_back(p);
  }
  if (pts.size() < 2) {
    throw PreconditionError("the condenser needs two fiber points of q inside the trace ball, found " +
                            std::to_string(pts.size()));
  }
  pts.resize(2);
  TraceOptions o;
  o.tol = c.config.mesh_tol;
  o.seed_labels = {"p1", "p2"};
  const SurfaceMesh traced = trace_preimage(c.map, c.plane(q), pts, R, c.config.h, o);
  const CondenserDomain dom = mark_condenser_boundaries(traced, c.map, q, pts, c.config.ball_radius);
  const HarmonicField f = solve_condenser(dom.mesh, dom.rims[0], dom.rims[1]);
  nlohmann::json j = field_json(f);
  j["patch_sizes"] = dom.patch_sizes;
  j["topology"] = to_json(mesh_topology(dom.mesh));
  c.report.add_stage("condenser", std::move(j), since(t0));
  c.write_mesh(dom.mesh, "mesh");
  c.write_field(f);
  code = kExitOk;
  return "capacity " + format_double(f.energy) + " on " + std::to_string(dom.mesh.vertex_count()) + " vertices";
}

std::string cmd_section(Context& c, int& code) {
  const Point q = c.q();
  if (c.n() < 3) throw PreconditionError("sections need n >= 3; " + c.map.name() + " has n = " + std::to_string(c.n()));
  const auto pts = c.fiber(q);
  const PlaneFamily family = sample_tangent_planes(c.config.level, c.n());
  SectionParams params;
  params.R = c.trace_radius();
  params.h = c.config.h;
  params.ball_radius = c.config.ball_radius;
  params.trace.tol = c.config.mesh_tol;
  params.jobs = c.config.jobs;

  const auto t0 = Clock::now();
  SectionField field;
  if (c.config.construction == "log") {
    if (pts.size() < 2) {
      throw PreconditionError(
          "the log construction needs two distinct points a != b with F(a) = F(b) = q, but " + c.map.name() +
          " has " + std::to_string(pts.size()) +
          " fiber point(s) over q. By the singleton-fiber theorem (a local diffeomorphism of R^n, n >= 3, whose "
          "plane preimages through q are all conformal to R^2 assumes q exactly once) there is no such pair to "
          "build from");
    }
    if (c.config.radii.size() >= 3) params.exhaustion_radii = c.config.radii;
    field = build_log_section(c.map, q, pts[0], pts[1], family, params);
  } else {
    field = build_condenser_section(c.map, q, pts, family, params);
  }
  c.report.add_stage("section",
                     {{"construction", field.construction},
                      {"ok", field.ok_count()},
                      {"total", field.samples.size()},
                      {"complete", field.complete()},
                      {"max_tangency_error", field.max_tangency_error()},
                      {"provenance", field.provenance}},
                     since(t0));
  c.artifact("section.json", to_json(field).dump(2) + "\n");

  nlohmann::json conformal = nlohmann::json::array();
  for (const auto& s : field.samples) {
    if (s.conformal) conformal.push_back({{"id", s.id}, {"report", to_json(*s.conformal)}});
  }
  if (!conformal.empty()) c.report.add_stage("conformal_type", conformal, 0.0);

  const auto t1 = Clock::now();
  const IndexReport idx = index_sum(field, family);
  c.report.add_stage("index", to_json(idx), since(t1));
  c.artifact("index.json", to_json(idx).dump(2) + "\n");

  if (field.complete()) {
    const ContinuityReport cont = continuity_diagnostic(field, family);
    c.report.add_stage("continuity", {{"complete", cont.complete},
                                      {"max_angle_deg", cont.max_angle_deg},
                                      {"max_relative_jump", cont.max_relative_jump},
                                      {"trend", cont.trend}},
                       0.0);
  }
  code = kExitOk;
  std::string summary = field.construction + " section: " + std::to_string(field.ok_count()) + "/" +
                        std::to_string(field.samples.size()) + " samples ok";
  if (idx.resolved && field.complete()) summary += ", index sum " + std::to_string(idx.index_sum);
  return summary;
}

std::string cmd_verify_identities(Context& c, int& code) {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(c.config.seed);
  double det_err = 0.0, spec_err = 0.0;
  bool det_pass = true, spec_pass = true;
  for (std::size_t k = 0; k < kIdentitySamples; ++k) {
    const int n = 1 + static_cast<int>(k % 3);
    const ComplexPolyMap g = random_complex_poly_map(rng, n);
    const ComplexPoint z = random_complex_point(rng, n);
    const auto d = det_identity_check(g, z);
    const auto s = spectrum_identity_check(g, z);
    det_err = std::max(det_err, d.rel_error);
    spec_err = std::max(spec_err, s.max_pairing_distance);
    det_pass = det_pass && d.pass;
    spec_pass = spec_pass && s.match;
  }
  nlohmann::json checks = nlohmann::json::array();
  checks.push_back({{"check", "det_identity"}, {"samples", kIdentitySamples}, {"max_error", det_err}, {"pass", det_pass}});
  checks.push_back(
      {{"check", "spectrum_identity"}, {"samples", kIdentitySamples}, {"max_error", spec_err}, {"pass", spec_pass}});
  bool pass = det_pass && spec_pass;

  // Euler relation for the selected map when it has the I + cubic form.
  try {
    const auto f = decompose_identity_plus(c.map);
    const auto cert = euler_relation_certificate(f, 200, make_box(c.config.box, c.n()), c.config.seed);
    checks.push_back({{"check", "euler_relation"},
                      {"map", c.map.name()},
                      {"samples", cert.samples},
                      {"max_error", cert.max_residual},
                      {"min_distance_to_minus_two", cert.min_distance_to_minus_two},
                      {"pass", cert.pass}});
    pass = pass && cert.pass;
  } catch (const PreconditionError& e) {
    checks.push_back({{"check", "euler_relation"}, {"map", c.map.name()}, {"skipped", e.what()}});
  }
  c.report.add_stage("identities", checks, since(t0));
  c.artifact("identities.json", checks.dump(2) + "\n");
  code = pass ? kExitOk : kExitNumerical;
  return std::string("identities ") + (pass ? "PASS" : "FAIL") + " (det " + format_double(det_err) + ", spectrum " +
         format_double(spec_err) + ")";
}

using Handler = std::function<std::string(Context&, int&)>;

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h = {{"fiber", cmd_fiber},
                                                                 {"trace", cmd_trace},
                                                                 {"condenser", cmd_condenser},
                                                                 {"section", cmd_section},
                                                                 {"verify-identities", cmd_verify_identities}};
  return h;
}

std::string_view status_name(int code) {
  switch (code) {
    case kExitOk: return "ok";
    case kExitConfig: return "config-error";
    case kExitPrecondition: return "precondition-violation";
    default: return "numerical-failure";
  }
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const PreconditionError*>(&e)) return kExitPrecondition;
  return kExitNumerical;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [name, fn] : handlers()) v.push_back(name);
    return v;
  }();
  return names;
}

CommandOutcome run_command(const std::string& command, const RunConfig& config) {
  CommandOutcome outcome{RunReport(command, config), kExitOk, {}};
  const auto it = std::find_if(handlers().begin(), handlers().end(), [&](const auto& h) { return h.first == command; });
  if (it == handlers().end()) {
    outcome.exit_code = kExitConfig;
    outcome.summary = "unknown command '" + command + "'";
    return outcome;
  }
  const std::filesystem::path out(config.out);
  std::string message;
  try {
    Context ctx{config, outcome.report, out, resolve_map(config.map)};
    outcome.summary = it->second(ctx, outcome.exit_code);
  } catch (const std::exception& e) {
    outcome.exit_code = exit_code_for(e);
    outcome.summary = e.what();
    message = e.what();
  }
  outcome.report.set_status(std::string(status_name(outcome.exit_code)), outcome.exit_code,
                            message.empty() ? outcome.summary : message);
  try {
    outcome.report.write(out);
  } catch (const std::exception& e) {
    if (outcome.exit_code == kExitOk) outcome.exit_code = kExitConfig;
    outcome.summary += std::string("; report not written: ") + e.what();
  }
  return outcome;
}

nlohmann::json verify_report(const std::filesystem::path& out_dir) {
  const auto path = out_dir / "report.json";
  std::ifstream in(path);
  if (!in) throw ConfigError("no report at " + path.string());
  nlohmann::json report;
  try {
    report = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  nlohmann::json files = nlohmann::json::array();
  bool ok = true;
  for (const auto& a : report.value("artifacts", nlohmann::json::array())) {
    const std::string rel = a.at("path");
    std::string actual;
    try {
      actual = sha256_file(out_dir / rel);
    } catch (const Error&) {
      actual = "missing";
    }
    const bool match = actual == a.at("sha256").get<std::string>();
    ok = ok && match;
    files.push_back({{"path", rel}, {"match", match}});
  }
  return {{"command", report.value("command", "")},
          {"result", report.value("result", nlohmann::json::object())},
          {"artifacts", files},
          {"artifacts_ok", ok}};
}

}  // namespace invertlab
