#include "invertlab/run_config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace invertlab {

namespace {

namespace pt = boost::property_tree;

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += format_double(v[i]);
  }
  return s;
}

double to_double(const std::string& s, const std::string& key) {
  const auto v = parse_number_list(s, key);
  if (v.size() != 1) throw ConfigError(key + ": expected one number, got '" + s + "'");
  return v[0];
}

template <typename Int>
Int to_int(const std::string& s, const std::string& key) {
  const std::string t = boost::trim_copy(s);
  Int v{};
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw ConfigError("cannot format number");
  return {buf, ptr};
}

std::vector<double> parse_number_list(std::string_view text, std::string_view what) {
  std::vector<double> out;
  std::string t = boost::trim_copy(std::string(text));
  if (t.empty()) return out;
  std::vector<std::string> parts;
  boost::split(parts, t, boost::is_any_of(","));
  for (auto& p : parts) {
    boost::trim(p);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(p.data(), p.data() + p.size(), v);
    if (p.empty() || ec != std::errc() || ptr != p.data() + p.size()) {
      throw ConfigError(std::string(what) + ": cannot parse number '" + p + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string serialize(const RunConfig& c) {
  std::ostringstream s;
  s << "[map]\nname = " << c.map << "\n\n";
  s << "[target]\nq = " << join(c.q) << "\nbox = " << join(c.box) << "\nplane = " << join(c.plane)
    << "\npoints = " << join(c.points) << "\n\n";
  s << "[tolerances]\nsolve = " << format_double(c.solve_tol) << "\nmesh = " << format_double(c.mesh_tol)
    << "\ndedup = " << format_double(c.dedup_tol) << "\n\n";
  s << "[mesh]\nradii = " << join(c.radii) << "\nh = " << format_double(c.h)
    << "\nball_radius = " << format_double(c.ball_radius) << "\nlevel = " << c.level
    << "\nsource = " << c.mesh_source << "\n\n";
  s << "[run]\nseed = " << c.seed << "\nstarts = " << c.starts << "\njobs = " << c.jobs
    << "\nconstruction = " << c.construction << "\nout = " << c.out << "\n";
  return s.str();
}

RunConfig parse_run_config(std::string_view text) {
  pt::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }

  static const std::set<std::string> known = {
      "map.name",        "target.q",     "target.box",      "target.plane", "target.points",
      "tolerances.solve", "tolerances.mesh", "tolerances.dedup", "mesh.radii", "mesh.h",
      "mesh.ball_radius", "mesh.level",  "mesh.source",     "run.seed",     "run.starts",
      "run.jobs",        "run.construction", "run.out"};
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError("config key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!known.contains(section + "." + key)) {
        throw ConfigError("config: unknown field '" + section + "." + key + "'");
      }
    }
  }

  RunConfig c;
  auto get = [&](const char* path) { return tree.get_optional<std::string>(path); };
  if (auto v = get("map.name")) c.map = boost::trim_copy(*v);
  if (auto v = get("target.q")) c.q = parse_number_list(*v, "target.q");
  if (auto v = get("target.box")) c.box = parse_number_list(*v, "target.box");
  if (auto v = get("target.plane")) c.plane = parse_number_list(*v, "target.plane");
  if (auto v = get("target.points")) c.points = parse_number_list(*v, "target.points");
  if (auto v = get("tolerances.solve")) c.solve_tol = to_double(*v, "tolerances.solve");
  if (auto v = get("tolerances.mesh")) c.mesh_tol = to_double(*v, "tolerances.mesh");
  if (auto v = get("tolerances.dedup")) c.dedup_tol = to_double(*v, "tolerances.dedup");
  if (auto v = get("mesh.radii")) c.radii = parse_number_list(*v, "mesh.radii");
  if (auto v = get("mesh.h")) c.h = to_double(*v, "mesh.h");
  if (auto v = get("mesh.ball_radius")) c.ball_radius = to_double(*v, "mesh.ball_radius");
  if (auto v = get("mesh.level")) c.level = to_int<int>(*v, "mesh.level");
  if (auto v = get("run.seed")) c.seed = to_int<std::uint64_t>(*v, "run.seed");
  if (auto v = get("run.starts")) c.starts = to_int<std::size_t>(*v, "run.starts");
  if (auto v = get("run.jobs")) c.jobs = to_int<unsigned>(*v, "run.jobs");
  if (auto v = get("mesh.source")) c.mesh_source = boost::trim_copy(*v);
  if (auto v = get("run.construction")) c.construction = boost::trim_copy(*v);
  if (auto v = get("run.out")) c.out = boost::trim_copy(*v);
  if (c.construction != "condenser" && c.construction != "log") {
    throw ConfigError("run.construction must be 'condenser' or 'log', got '" + c.construction + "'");
  }
  if (c.map.empty()) throw ConfigError("map.name must not be empty");
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  try {
    return parse_run_config(s.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Box make_box(const std::vector<double>& spec, int dim) {
  Point lo(dim), hi(dim);
  if (spec.empty()) {
    return Box::centered(dim, 10.0);
  } else if (spec.size() == 1) {
    if (!(spec[0] > 0.0)) throw ConfigError("box half-width must be positive");
    return Box::centered(dim, spec[0]);
  } else if (spec.size() == 2) {
    lo.setConstant(spec[0]);
    hi.setConstant(spec[1]);
  } else if (spec.size() == 2 * static_cast<std::size_t>(dim)) {
    for (int i = 0; i < dim; ++i) {
      lo[i] = spec[2 * static_cast<std::size_t>(i)];
      hi[i] = spec[2 * static_cast<std::size_t>(i) + 1];
    }
  } else {
    throw ConfigError("box needs 1, 2 or " + std::to_string(2 * dim) + " numbers, got " +
                      std::to_string(spec.size()));
  }
  if ((hi.array() <= lo.array()).any()) throw ConfigError("box: every lower bound must be below its upper bound");
  return Box(lo, hi);
}

}  // namespace invertlab
