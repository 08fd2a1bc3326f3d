#include <invertlab/commands.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <iostream>
#include <optional>

using namespace invertlab;

namespace {

struct Overrides {
  std::optional<std::string> config, map, q, box, seed, level, radii, jobs, out;
  std::optional<std::string> points, plane, h, ball_radius, starts, construction, mesh, solve_tol, mesh_tol, dedup_tol;
  bool print_config = false;
};

template <typename Int>
Int parse_int(const std::string& s, const char* what) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(std::string(what) + ": expected an integer, got '" + s + "'");
  return v;
}

double parse_one(const std::string& s, const char* what) {
  const auto v = parse_number_list(s, what);
  if (v.size() != 1) throw ConfigError(std::string(what) + ": expected one number");
  return v[0];
}

RunConfig resolve(const Overrides& o) {
  RunConfig c = o.config ? load_run_config(*o.config) : RunConfig{};
  if (o.map) c.map = *o.map;
  if (o.q) c.q = parse_number_list(*o.q, "--q");
  if (o.box) c.box = parse_number_list(*o.box, "--box");
  if (o.seed) c.seed = parse_int<std::uint64_t>(*o.seed, "--seed");
  if (o.level) c.level = parse_int<int>(*o.level, "--level");
  if (o.radii) c.radii = parse_number_list(*o.radii, "--radii");
  if (o.jobs) c.jobs = parse_int<unsigned>(*o.jobs, "--jobs");
  if (o.out) c.out = *o.out;
  if (o.points) c.points = parse_number_list(*o.points, "--points");
  if (o.plane) c.plane = parse_number_list(*o.plane, "--plane");
  if (o.h) c.h = parse_one(*o.h, "--edge-length");
  if (o.ball_radius) c.ball_radius = parse_one(*o.ball_radius, "--ball-radius");
  if (o.starts) c.starts = parse_int<std::size_t>(*o.starts, "--starts");
  if (o.construction) c.construction = *o.construction;
  if (o.mesh) c.mesh_source = *o.mesh;
  if (o.solve_tol) c.solve_tol = parse_one(*o.solve_tol, "--solve-tol");
  if (o.mesh_tol) c.mesh_tol = parse_one(*o.mesh_tol, "--mesh-tol");
  if (o.dedup_tol) c.dedup_tol = parse_one(*o.dedup_tol, "--dedup-tol");
  if (c.construction != "condenser" && c.construction != "log") {
    throw ConfigError("--construction must be 'condenser' or 'log'");
  }
  if (c.jobs == 0) throw ConfigError("--jobs must be at least 1");
  return c;
}

void add_run_options(CLI::App* app, Overrides& o) {
  const RunConfig d;
  auto opt = [&](const char* flag, std::optional<std::string>& slot, const std::string& help, const char* env) {
    app->add_option(flag, slot, help)->envname(env);
  };
  opt("--config", o.config, "run config file ([map] [target] [tolerances] [mesh] [run] sections)", "INVERTLAB_CONFIG");
  opt("--map", o.map, "builtin map (braun3d, exp_c2, cubic_shear, square_c1, identity<n>) or map config path; default " + d.map,
      "INVERTLAB_MAP");
  opt("--q", o.q, "target point, comma-separated (use --q=-1,0,0 for a leading minus)", "INVERTLAB_Q");
  opt("--box", o.box, "search box: v (cube [-v,v]^n), lo,hi or lo1,hi1,...; default -10,10", "INVERTLAB_BOX");
  opt("--seed", o.seed, "RNG seed; default " + std::to_string(d.seed), "INVERTLAB_SEED");
  opt("--level", o.level, "icosphere level of the plane family; default " + std::to_string(d.level), "INVERTLAB_LEVEL");
  opt("--radii", o.radii, "truncation radii, the largest is traced; default 10", "INVERTLAB_RADII");
  opt("--jobs", o.jobs, "worker threads for per-plane tasks; default " + std::to_string(d.jobs), "INVERTLAB_JOBS");
  opt("--out", o.out, "output directory; default " + d.out, "INVERTLAB_OUT");
  opt("--points", o.points, "fiber points (n numbers each, concatenated) instead of a search", "INVERTLAB_POINTS");
  opt("--plane", o.plane, "two spanning vectors of the plane (2n numbers); default span(e1, e2)", "INVERTLAB_PLANE");
  opt("--edge-length", o.h, "target mesh edge length h; default R/64", "INVERTLAB_EDGE_LENGTH");
  opt("--ball-radius", o.ball_radius, "radius of the ball around q cut out at each fiber point; default " + format_double(d.ball_radius),
      "INVERTLAB_BALL_RADIUS");
  opt("--starts", o.starts, "multistart Newton starts; default " + std::to_string(d.starts), "INVERTLAB_STARTS");
  opt("--construction", o.construction, "section construction: condenser or log; default " + d.construction,
      "INVERTLAB_CONSTRUCTION");
  opt("--mesh", o.mesh, "condenser mesh: annulus:<a>[:<h>] or an OFF file; default: trace the preimage", "INVERTLAB_MESH");
  opt("--solve-tol", o.solve_tol, "Newton residual tolerance; default " + format_double(d.solve_tol), "INVERTLAB_SOLVE_TOL");
  opt("--mesh-tol", o.mesh_tol, "mesh vertex residual bound; default " + format_double(d.mesh_tol), "INVERTLAB_MESH_TOL");
  opt("--dedup-tol", o.dedup_tol, "fiber dedup radius; default 1e-6 * diam(box)", "INVERTLAB_DEDUP_TOL");
  app->add_flag("--print-config", o.print_config, "print the resolved config and exit");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invertlab: numerical laboratory for plane preimages of local diffeomorphisms"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "invertlab 0.1.0");

  Overrides o;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"fiber", "enumerate F^{-1}(q) in a box"},
      {"trace", "mesh the preimage F^{-1}(q + pi) of a plane"},
      {"condenser", "solve the condenser problem on a traced or bundled mesh"},
      {"section", "build a section over the icosphere family, with index sum"},
      {"verify-identities", "determinant and spectrum identities on random complex maps"}};
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_run_options(sub, o);
    subs.push_back(sub);
  }
  std::optional<std::string> report_out;
  CLI::App* report = app.add_subcommand("report", "summarise a finished run and re-check its artifact hashes");
  report->add_option("--out", report_out, "output directory of the run")->envname("INVERTLAB_OUT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (report->parsed()) {
      const nlohmann::json r = verify_report(report_out.value_or(RunConfig{}.out));
      std::cout << r.dump(2) << "\n";
      return r.at("artifacts_ok").get<bool>() ? kExitOk : kExitNumerical;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (!subs[i]->parsed()) continue;
      const RunConfig config = resolve(o);
      if (o.print_config) {
        std::cout << serialize(config);
        return kExitOk;
      }
      const CommandOutcome res = run_command(commands[i].first, config);
      (res.exit_code == kExitOk ? std::cout : std::cerr)
          << (res.exit_code == kExitOk ? "" : "invertlab: error: ") << res.summary << "\n";
      if (res.exit_code == kExitOk) std::cout << "report: " << (std::filesystem::path(config.out) / "report.json").string() << "\n";
      return res.exit_code;
    }
  } catch (const std::exception& e) {
    std::cerr << "invertlab: error: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kExitConfig;
}
