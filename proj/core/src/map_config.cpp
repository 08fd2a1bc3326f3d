#include "invertlab/map_catalog.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <sstream>

namespace invertlab {

namespace {

namespace pt = boost::property_tree;

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(where + ": cannot parse number '" + s + "'");
  }
}

std::complex<double> parse_coefficient(std::string s, bool complex_kind, const std::string& where) {
  boost::trim(s);
  if (!s.empty() && s.front() == '(') {
    if (!complex_kind) throw ConfigError(where + ": complex coefficient in a real map");
    if (s.back() != ')') throw ConfigError(where + ": unterminated complex coefficient '" + s + "'");
    std::vector<std::string> parts;
    const std::string inner = s.substr(1, s.size() - 2);
    boost::split(parts, inner, boost::is_any_of(","));
    if (parts.size() != 2) throw ConfigError(where + ": complex coefficient needs (re,im)");
    return {parse_double(boost::trim_copy(parts[0]), where),
            parse_double(boost::trim_copy(parts[1]), where)};
  }
  return {parse_double(s, where), 0.0};
}

// "c @ e1,e2,... + c @ ..." ; a lone "0" is the zero polynomial.
std::vector<std::pair<std::complex<double>, Exponents>> parse_terms(const std::string& text, int dim,
                                                                    bool complex_kind,
                                                                    const std::string& where) {
  std::vector<std::pair<std::complex<double>, Exponents>> out;
  if (boost::trim_copy(text) == "0") return out;

  // Split on '+' that is not inside parentheses and not an exponent sign.
  std::vector<std::string> chunks;
  std::string cur;
  int depth = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    const bool exp_sign = i > 0 && (text[i - 1] == 'e' || text[i - 1] == 'E');
    if (c == '+' && depth == 0 && !exp_sign) {
      chunks.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  chunks.push_back(cur);

  for (auto& chunk : chunks) {
    boost::trim(chunk);
    const auto at = chunk.find('@');
    if (at == std::string::npos) throw ConfigError(where + ": term '" + chunk + "' lacks '@'");
    const auto coef = parse_coefficient(chunk.substr(0, at), complex_kind, where);
    std::vector<std::string> exps;
    const std::string exp_text = boost::trim_copy(chunk.substr(at + 1));
    boost::split(exps, exp_text, boost::is_any_of(","));
    if (static_cast<int>(exps.size()) != dim) {
      throw ConfigError(where + ": term '" + chunk + "' has " + std::to_string(exps.size()) +
                        " exponents, expected " + std::to_string(dim));
    }
    Exponents e;
    for (auto& x : exps) {
      boost::trim(x);
      const double v = parse_double(x, where);
      if (v < 0 || v != static_cast<int>(v)) {
        throw ConfigError(where + ": exponent '" + x + "' is not a non-negative integer");
      }
      e.push_back(static_cast<int>(v));
    }
    out.emplace_back(coef, std::move(e));
  }
  return out;
}

}  // namespace

MapSpec parse_map_config(std::string_view text) {
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("map config line " + std::to_string(e.line()) + ": " + e.message());
  }

  const auto name = tree.get<std::string>("map.name", "unnamed");
  const auto kind = tree.get_optional<std::string>("map.kind");
  if (!kind) throw ConfigError("map config: missing field map.kind");
  const bool complex_kind = *kind == "polynomial-complex";
  if (!complex_kind && *kind != "polynomial-real") {
    throw ConfigError("map config: field map.kind must be polynomial-real or polynomial-complex, got '" +
                      *kind + "'");
  }
  int dim = 0;
  try {
    dim = tree.get<int>("map.dimension");
  } catch (const pt::ptree_error&) {
    throw ConfigError("map config: field map.dimension missing or not an integer");
  }
  if (dim < 1) throw ConfigError("map config: field map.dimension must be >= 1");

  const auto comps = tree.get_child_optional("components");
  if (!comps) throw ConfigError("map config: missing [components] section");

  std::vector<RealPolynomial> real;
  std::vector<ComplexPolynomial> cplx;
  for (int i = 0; i < dim; ++i) {
    const std::string key = "f" + std::to_string(i);
    const auto value = comps->get_optional<std::string>(key);
    if (!value) throw ConfigError("map config: missing field components." + key);
    const auto terms = parse_terms(*value, dim, complex_kind, "map config field components." + key);
    if (complex_kind) {
      std::vector<ComplexPolynomial::Term> t;
      for (const auto& [c, e] : terms) t.push_back({e, c});
      cplx.emplace_back(dim, t);
    } else {
      std::vector<RealPolynomial::Term> t;
      for (const auto& [c, e] : terms) t.push_back({e, c.real()});
      real.emplace_back(dim, t);
    }
  }
  for (const auto& [key, _] : *comps) {
    if (key.size() < 2 || key[0] != 'f') throw ConfigError("map config: unknown field components." + key);
    const int idx = std::atoi(key.c_str() + 1);
    if (idx < 0 || idx >= dim || key != "f" + std::to_string(idx)) {
      throw ConfigError("map config: unexpected field components." + key);
    }
  }

  return complex_kind ? MapSpec::realified(name, std::move(cplx)) : MapSpec::polynomial(name, std::move(real));
}

MapSpec load_map_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open map config '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_map_config(buf.str());
}

MapSpec resolve_map(std::string_view name_or_path) {
  const std::filesystem::path p{std::string(name_or_path)};
  std::error_code ec;
  if (std::filesystem::is_regular_file(p, ec)) return load_map_config(p);
  return MapSpec::builtin(name_or_path);
}

}  // namespace invertlab
