// Acceptance suite: one PASS/FAIL line per criterion.
#include <invertlab/commands.hpp>
#include <invertlab/fiber.hpp>
#include <invertlab/harmonic.hpp>
#include <invertlab/mesh_builders.hpp>
#include <invertlab/section.hpp>
#include <invertlab/spectral.hpp>
#include <invertlab/tracer.hpp>

#include "marching.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace invertlab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

Point P(std::initializer_list<double> v) {
  Point p(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) p[i++] = x;
  return p;
}

Point braun_point(int k) { return P({0.5 * std::log(5.0), std::atan2(1.0, 2.0) + 2.0 * M_PI * k, 0.0}); }

double exact_u(double a, double r) { return (std::log(a) - std::log(r)) / std::log(a); }

double max_nodal_error(const HarmonicField& f, double a) {
  double e = 0.0;
  for (std::size_t v = 0; v < f.mesh->vertex_count(); ++v) {
    e = std::max(e, std::abs(f.values[static_cast<Eigen::Index>(v)] - exact_u(a, f.mesh->vertex(static_cast<int>(v)).norm())));
  }
  return e;
}

HarmonicField annulus_condenser(const SurfaceMesh& m) {
  const auto loops = loops_by_radius(m, Point::Zero(2));
  if (loops.size() != 2) throw NumericalError("annulus mesh without two boundary loops");
  return solve_condenser(m, loops[0], loops[1]);
}

int vertex_near_radius(const SurfaceMesh& m, double r) {
  int best = -1;
  double bd = 1e300;
  for (std::size_t v = 0; v < m.vertex_count(); ++v) {
    const double d = std::abs(m.vertex(static_cast<int>(v)).norm() - r);
    if (d < bd && !m.is_boundary_vertex(static_cast<int>(v))) {
      bd = d;
      best = static_cast<int>(v);
    }
  }
  return best;
}

Point tangent_part(const Point& v, const Point& p) { return v - v.dot(p) * p; }

// ---------------------------------------------------------------------------

Outcome condenser_closed_form() {
  const double a = 0.25;
  const SurfaceMesh m = flat_annulus_uniform(a, 1.0, 0.026);
  const double coarse = max_nodal_error(annulus_condenser(m), a);
  const double fine = max_nodal_error(annulus_condenser(refine(m)), a);
  return {m.vertex_count() >= 4000 && m.vertex_count() <= 6000 && coarse <= 2e-2 && fine < coarse,
          std::to_string(m.vertex_count()) + " vertices, max nodal error " + fmt(coarse) + " -> " + fmt(fine) +
              " after refine"};
}

Outcome annulus_capacity() {
  Outcome o{true, ""};
  const std::vector<std::pair<double, SurfaceMesh>> cases = {
      {0.25, flat_annulus_uniform(0.25, 1.0, 0.026)},
      {std::exp(-2.0 * M_PI), flat_annulus(std::exp(-2.0 * M_PI), 1.0, 64)}};
  for (const auto& [a, m] : cases) {
    const double cap = capacity(annulus_condenser(m));
    const double exact = 2.0 * M_PI / std::log(1.0 / a);
    const double rel = std::abs(cap - exact) / exact;
    o.pass = o.pass && rel <= 0.02;
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("a=") + fmt(a) + " rel error " + fmt(rel);
  }
  return o;
}

Outcome poincare_hopf() {
  const PlaneFamily fam = sample_tangent_planes(2);
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> g;
  int failures = 0, zeros = 0;
  for (int trial = 0; trial < 20; ++trial) {
    // tangential gradient of l.x + x^T A x + sum c_i x_i^3
    Eigen::Matrix3d A;
    Eigen::Vector3d c, l;
    for (int i = 0; i < 9; ++i) A.data()[i] = g(rng);
    for (int i = 0; i < 3; ++i) c[i] = g(rng), l[i] = g(rng);
    A = 0.5 * (A + A.transpose());
    auto f = [&](const Point& p) {
      const Eigen::Vector3d x = p.head<3>();
      const Eigen::Vector3d grad = l + 2.0 * A * x + 3.0 * c.cwiseProduct(x.cwiseProduct(x));
      return tangent_part(Point(grad), p);
    };
    std::vector<Point> v;
    for (const auto& p : fam.samples) v.push_back(f(p));
    const IndexReport r = index_sum(fam.samples, v, fam.faces, fam.level, f);
    if (r.index_sum != 2 || !r.resolved) ++failures;
    zeros += static_cast<int>(r.zeros.size());
  }
  return {failures == 0, "20 fields, " + std::to_string(failures) + " failures, " + std::to_string(zeros) + " zero cells"};
}

Outcome tautological() {
  Outcome o{true, "e(T) ="};
  for (int n : {64, 256, 1024}) {
    const int e = tautological_euler(n);
    o.pass = o.pass && e == -1;
    o.detail += " " + std::to_string(e) + " (" + std::to_string(n) + ")";
  }
  return o;
}

Outcome rp1_moebius() {
  std::mt19937_64 rng(55);
  std::normal_distribution<double> g;
  std::uniform_int_distribution<int> sizes(16, 96);
  int odd = 0, changes = 0;
  for (int set = 0; set < 20; ++set) {
    // coefficient along the line: odd harmonics, so c(t + pi) = -c(t)
    std::vector<double> a(3), b(3);
    for (int k = 0; k < 3; ++k) a[k] = g(rng), b[k] = g(rng);
    auto coeff = [&](double t) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += a[k] * std::cos((2 * k + 1) * t) + b[k] * std::sin((2 * k + 1) * t);
      return s;
    };
    const int N = sizes(rng);
    std::uniform_real_distribution<double> jitter(0.0, M_PI / N);
    std::vector<Rp1Sample> v;
    for (int k = 0; k < N; ++k) {
      double t = M_PI * k / N + jitter(rng);
      while (std::abs(coeff(t)) < 1e-6) t += 1e-4;
      Rp1Sample s;
      s.line = Eigen::VectorXcd(2);
      s.line << std::cos(t), std::sin(t);
      s.section = coeff(t) * s.line;
      v.push_back(std::move(s));
    }
    const Rp1ParityReport r = rp1_parity(v);
    odd += r.odd && r.zero_samples.empty() ? 1 : 0;
    changes += r.sign_changes;
  }
  return {odd == 20, std::to_string(odd) + "/20 sets odd, " + std::to_string(changes) + " sign changes in total"};
}

Outcome spectral_identities() {
  std::mt19937_64 rng(606);
  double det_err = 0.0, spec_err = 0.0;
  int bad = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = 1 + k % 3;
    const ComplexPolyMap m = random_complex_poly_map(rng, n);
    const ComplexPoint z = random_complex_point(rng, n);
    const auto d = det_identity_check(m, z);
    const auto s = spectrum_identity_check(m, z);
    det_err = std::max(det_err, d.rel_error);
    spec_err = std::max(spec_err, s.max_pairing_distance);
    if (!d.pass || !s.match) ++bad;
  }
  return {bad == 0 && det_err <= 1e-10 && spec_err <= 1e-8,
          "50 maps, det rel error " + fmt(det_err) + ", spectrum distance " + fmt(spec_err)};
}

Outcome euler_certificate() {
  const MapSpec f = MapSpec::builtin("cubic_shear");
  const auto c = euler_relation_certificate(decompose_identity_plus(f), 200, Box::centered(2, 5.0));
  const auto fiber = enumerate_fiber(f, Point::Zero(2), Box::centered(2, 5.0));
  const bool only_zero = fiber.points.size() == 1 && fiber.points[0].x.norm() <= 1e-8;
  return {c.pass && c.max_residual <= 1e-12 && only_zero,
          "residual " + fmt(c.max_residual) + ", fiber of 0 has " + std::to_string(fiber.points.size()) + " point(s)"};
}

Outcome braun_fibers() {
  const MapSpec f = MapSpec::builtin("braun3d");
  const auto r = enumerate_fiber(f, P({2, 1, 0}), Box::centered(3, 10.0));
  double worst = 0.0;
  for (int k = -1; k <= 1; ++k) {
    double best = 1e300;
    for (const auto& p : r.points) best = std::min(best, (p.x - braun_point(k)).norm());
    worst = std::max(worst, best);
  }
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  double det_err = 0.0;
  for (int k = 0; k < 100; ++k) {
    const Point x = P({u(rng), u(rng), u(rng)});
    det_err = std::max(det_err, std::abs(f.jacobian(x).det - std::exp(2.0 * x[0])) / std::exp(2.0 * x[0]));
  }
  return {r.points.size() == 3 && worst <= 1e-8 && det_err <= 1e-12,
          std::to_string(r.points.size()) + " points, closed-form distance " + fmt(worst) + ", det rel error " +
              fmt(det_err)};
}

Outcome exp_fibers() {
  const auto r = enumerate_fiber(MapSpec::builtin("exp_c2"), P({1, 0, 1, 0}),
                                 Box(P({-5, -7, -5, -5}), P({5, 7, 5, 5})));
  std::set<long> ks;
  double worst = 0.0;
  for (const auto& p : r.points) {
    const long k = std::lround(p.x[1] / (2.0 * M_PI));
    ks.insert(k);
    worst = std::max(worst, (p.x - P({0, 2.0 * M_PI * static_cast<double>(k), 1, 0})).norm());
  }
  return {r.points.size() == 3 && ks == std::set<long>{-1, 0, 1} && worst <= 1e-8,
          std::to_string(r.points.size()) + " points, distance to (0, 2 pi k, 1, 0) " + fmt(worst)};
}

Outcome conformal() {
  Outcome o{true, ""};
  auto check = [&](const std::string& name, std::vector<ExhaustionLevel> levels, ConformalVerdict expected,
                   const std::function<double(double)>& modulus) {
    const auto r = conformal_type(levels);
    double worst = 0.0;
    for (std::size_t k = 0; k < r.radii.size(); ++k) {
      const double m = modulus(r.radii[k]);
      worst = std::max(worst, std::abs(r.moduli[k] - m) / m);
    }
    o.pass = o.pass && r.verdict == expected && worst <= 0.05;
    o.detail += (o.detail.empty() ? "" : "; ") + name + " " + std::string(to_string(r.verdict)) + " modulus error " +
                fmt(worst);
  };
  std::vector<ExhaustionLevel> cyl, ann, trumpet;
  for (double L : {10.0, 20.0, 40.0}) {
    ExhaustionLevel lv;
    lv.mesh = cylinder(1.0, L, 32);
    const auto& loops = lv.mesh.boundary_loops();
    lv.inner = lv.mesh.vertex(loops[0][0])[2] < 1.0 ? loops[0] : loops[1];
    lv.radius = L;
    cyl.push_back(std::move(lv));
  }
  for (double R : {10.0, 100.0, 1000.0}) {
    ExhaustionLevel lv;
    lv.mesh = flat_annulus(1.0, R, 48);
    lv.inner = loops_by_radius(lv.mesh, Point::Zero(2))[0];
    lv.radius = R;
    ann.push_back(std::move(lv));
  }
  for (double S : {3.0, 5.0, 8.0}) {
    ExhaustionLevel lv;
    lv.mesh = trumpet_chart(S, 64);
    lv.inner = loops_by_radius(lv.mesh, Point::Zero(2))[0];
    lv.radius = S;
    trumpet.push_back(std::move(lv));
  }
  check("cylinders", std::move(cyl), ConformalVerdict::Parabolic, [](double L) { return L / (2.0 * M_PI); });
  check("annuli", std::move(ann), ConformalVerdict::Parabolic, [](double R) { return std::log(R) / (2.0 * M_PI); });
  check("trumpets", std::move(trumpet), ConformalVerdict::Hyperbolic,
        [](double S) { return (1.0 - std::exp(-S)) / (2.0 * M_PI); });
  return o;
}

Outcome log_normalized() {
  std::vector<ExhaustionLevel> levels;
  for (int k : {2, 3, 4}) {
    const double R = std::exp(static_cast<double>(k));
    ExhaustionLevel lv;
    lv.mesh = flat_annulus(1.0, R, 96, 20 * k);
    lv.inner = loops_by_radius(lv.mesh, Point::Zero(2))[0];
    lv.b = vertex_near_radius(lv.mesh, std::exp(1.0));
    lv.radius = R;
    levels.push_back(std::move(lv));
  }
  const LogNormalizedResult res = solve_log_normalized(levels);
  const SurfaceMesh& m = *res.field.mesh;
  const int v = vertex_near_radius(m, std::exp(2.0));
  const double value = res.field.values[v];
  const double grad = res.levels.back().gradient_at_b.norm();
  return {std::abs(value - 2.0) <= 5e-2 && std::abs(grad - std::exp(-1.0)) <= 5e-2,
          "u~(e^2) = " + fmt(value) + ", |grad u~(b)| = " + fmt(grad)};
}

// Seed-carrying components of the traced surface against marching tetrahedra
// on a 64^3 grid.
std::string grid_cross_check(const MapSpec& f, const Point& q, const std::vector<Point>& pts, const Plane& plane,
                             double R) {
  const SurfaceMesh traced = trace_preimage(f, plane, pts, R);
  const auto tt = mesh_topology(traced);
  const Point n = plane.normal.col(0);
  const SurfaceMesh grid = clip_to_ball(
      testing::march_zero_set([&](const Eigen::Vector3d& x) { return n.dot(f.evaluate(x) - q); }, R, 64), R);
  const auto gt = mesh_topology(grid);
  std::set<int> comps;
  for (const auto& p : pts) {
    const int v = grid.nearest_vertex(p);
    if ((grid.vertex(v) - p).norm() > 0.3) return "seed off the grid surface";
    comps.insert(gt.vertex_component[static_cast<std::size_t>(v)]);
  }
  std::size_t loops = 0;
  for (int c : comps) loops += gt.components[static_cast<std::size_t>(c)].boundary_loops;
  if (comps.size() != tt.component_count()) {
    return "components " + std::to_string(tt.component_count()) + " traced vs " + std::to_string(comps.size()) + " grid";
  }
  if (loops != tt.boundary_loop_count()) {
    return "boundary loops " + std::to_string(tt.boundary_loop_count()) + " traced vs " + std::to_string(loops) + " grid";
  }
  return {};
}

Outcome section_run() {
  RunConfig cfg;
  cfg.map = "braun3d";
  cfg.q = {2.0, 1.0, 0.0};
  cfg.level = 1;
  cfg.seed = 7;
  cfg.out = "acceptance_section";
  const CommandOutcome a = run_command("section", cfg);
  std::ifstream fa(std::filesystem::path(cfg.out) / "section.json");
  const std::string section_a((std::istreambuf_iterator<char>(fa)), {});
  const CommandOutcome b = run_command("section", cfg);
  std::ifstream fb(std::filesystem::path(cfg.out) / "section.json");
  const std::string section_b((std::istreambuf_iterator<char>(fb)), {});

  if (a.exit_code != kExitOk) return {false, "run failed: " + a.summary};
  const nlohmann::json rep = a.report.to_json();
  bool full = rep.contains("meta") && rep.contains("config") && rep.contains("result");
  for (const char* stage : {"fiber", "section", "index"}) full = full && rep["stages"].contains(stage);
  std::set<std::string> artifacts;
  for (const auto& art : rep["artifacts"]) artifacts.insert(art["path"].get<std::string>());
  full = full && artifacts.count("section.json") && artifacts.count("index.json");

  const nlohmann::json sec = nlohmann::json::parse(section_a);
  const std::set<std::string> terminal = {"ok", "trace-failed", "ends-not-disc", "solver-failed"};
  std::size_t n_terminal = 0, n_ok = 0;
  std::vector<std::size_t> ok_ids;
  for (const auto& s : sec["samples"]) {
    const std::string st = s["status"].get<std::string>();
    const bool diagnosed = st == "ok" || !s["diagnostic"].get<std::string>().empty();
    if (terminal.count(st) && diagnosed) ++n_terminal;
    if (st == "ok") {
      ++n_ok;
      ok_ids.push_back(s["id"].get<std::size_t>());
    }
  }
  const std::size_t total = sec["samples"].size();
  const bool same = a.report.numerical_content().dump() == b.report.numerical_content().dump() && section_a == section_b;

  // grid oracle on 5 random planes of the family
  const MapSpec f = MapSpec::builtin("braun3d");
  const Point q = P({2, 1, 0});
  std::vector<Point> pts;
  for (const auto& p : rep["stages"]["fiber"]["points"]) {
    const auto x = p["x"].get<std::vector<double>>();
    pts.push_back(Eigen::Map<const Point>(x.data(), static_cast<Eigen::Index>(x.size())));
  }
  const double R = rep["stages"]["section"]["provenance"]["R"].get<double>();
  const PlaneFamily fam = sample_tangent_planes(1);
  std::mt19937_64 rng(cfg.seed);
  std::shuffle(ok_ids.begin(), ok_ids.end(), rng);
  std::string oracle;
  std::size_t checked = 0;
  for (std::size_t i = 0; i < ok_ids.size() && checked < 5; ++i, ++checked) {
    Plane pl = fam.planes[ok_ids[i]];
    pl.base = q;
    const std::string msg = grid_cross_check(f, q, pts, pl, R);
    if (!msg.empty()) oracle += (oracle.empty() ? "" : "; ") + ("sample " + std::to_string(ok_ids[i]) + ": " + msg);
  }

  std::string detail = std::to_string(n_terminal) + "/" + std::to_string(total) + " terminal, " + std::to_string(n_ok) +
                       " ok, report " + (full ? "full" : "incomplete") + ", reruns " +
                       (same ? "identical" : "differ") + ", grid oracle " + std::to_string(checked) + " planes " +
                       (oracle.empty() ? "agree" : "disagree (" + oracle + ")");
  return {n_terminal == total && total == fam.size() && full && same && checked == 5 && oracle.empty(), detail};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  for (std::string item; std::getline(in, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Outcome property_suites() {
  std::string failed;
  int n = 0;
  for (const auto& exe : split(INVERTLAB_PROPERTY_SUITES, '|')) {
    ++n;
    const std::string log = std::filesystem::path(exe).filename().string() + ".acceptance.log";
    const std::string cmd = "\"" + exe + "\" > \"" + log + "\" 2>&1";
    if (std::system(cmd.c_str()) != 0) failed += " " + std::filesystem::path(exe).filename().string();
  }
  return {n > 0 && failed.empty(), std::to_string(n) + " suites" + (failed.empty() ? " green" : ", failing:" + failed)};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* title;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "condenser closed form on the flat annulus", 10, condenser_closed_form},
      {2, "annulus capacity", 10, annulus_capacity},
      {3, "index sum 2 on the level-2 icosphere", 30, poincare_hopf},
      {4, "tautological Euler number", 1, tautological},
      {5, "rp1 Moebius parity", 5, rp1_moebius},
      {6, "spectral identities", 30, spectral_identities},
      {7, "Euler-relation certificate for cubic_shear", 10, euler_certificate},
      {8, "braun3d fibers and determinant", 60, braun_fibers},
      {9, "exp_c2 fibers", 60, exp_fibers},
      {10, "conformal type classifier", 120, conformal},
      {11, "log-normalized solve", 60, log_normalized},
      {12, "braun3d condenser section over the level-1 family", 900, section_run},
      {13, "property suites", 0, property_suites},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s <= 0 || s <= c.budget_s;
    if (!in_time) o.detail += ", over the " + fmt(c.budget_s) + " s budget";
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.title << ": " << o.detail << " [" << fmt(s) << " s]"
              << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
