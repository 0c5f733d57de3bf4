#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hkx/harness.hpp"

namespace hkx {

/// Malformed or invalid run configuration. what() names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class OutputFormat { JSON, CSV };

struct RunConfig {
  Scenario scenario;
  std::vector<std::string> identities;
  std::string output;  // directory for report files; empty writes nothing
  OutputFormat format = OutputFormat::JSON;
  bool timing = false;  // include wall_ms in report files
  std::map<std::string, Real> tolerances;

  Real tolerance(const std::string& identity) const { return tolerances.at(identity); }
};

/// Acceptance tolerances on the probe residual of each identity.
inline std::map<std::string, Real> default_tolerances() {
  return {{"free_exchange", 1e-8}, {"hi_commutator", 1e-10}, {"pull_through", 1e-5},
          {"exchange", 1e-5},      {"exchange_special", 1e-5}, {"g_flatness", 1e-6},
          {"derivative_relation", 1e-6}, {"adjoint_step", 1e-8}};
}

namespace config_detail {

using boost::property_tree::ptree;

inline const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = [] {
    std::map<std::string, std::set<std::string>> k{
        {"lattice", {"sites", "spacing", "mass"}},
        {"fock", {"n_max", "probe_cap"}},
        {"polynomial", {"degree", "coefficients"}},
        {"functions", {"lambda", "f", "h", "g"}},
        {"evolution", {"beta", "steps", "method"}},
        {"run", {"name", "identities", "output", "format", "seed", "timing"}},
        {"debug", {"field_smearing"}},
    };
    for (const auto& [name, tol] : default_tolerances()) k["run"].insert("tol_" + name);
    return k;
  }();
  return keys;
}

inline std::string trim(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, s, boost::algorithm::is_any_of(","));
  for (auto& p : parts) p = trim(p);
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

/// Parses 1.5, -2e-3, 0.1+0.2i, -0.3i, i.
inline Complex parse_complex(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  static const std::regex real_re(R"(^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$)");
  static const std::regex imag_re(R"(^([+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?)?\*?i$)");
  static const std::regex both_re(
      R"(^([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)([+-](?:\d+\.?\d*|\.\d+)?(?:[eE][+-]?\d+)?)\*?i$)");
  std::smatch m;
  try {
    if (std::regex_match(s, real_re)) return {std::stod(s), 0.0};
    if (std::regex_match(s, m, imag_re)) {
      const std::string c = m[1].str();
      if (c.empty() || c == "+") return {0.0, 1.0};
      if (c == "-") return {0.0, -1.0};
      return {0.0, std::stod(c)};
    }
    if (std::regex_match(s, m, both_re)) {
      const std::string im = m[2].str();
      const Real imag = (im == "+") ? 1.0 : (im == "-") ? -1.0 : std::stod(im);
      return {std::stod(m[1].str()), imag};
    }
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": cannot parse number '" + s + "'");
}

inline Real parse_real(const std::string& raw, const std::string& key) {
  const Complex c = parse_complex(raw, key);
  if (c.imag() != 0.0) throw ConfigError(key + ": expected a real number");
  return c.real();
}

inline long long parse_integer(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  static const std::regex int_re(R"(^[+-]?\d+$)");
  if (!std::regex_match(s, int_re)) throw ConfigError(key + ": expected an integer, got '" + s + "'");
  try {
    return std::stoll(s);
  } catch (const std::exception&) {
    throw ConfigError(key + ": integer out of range");
  }
}

inline bool parse_bool(const std::string& raw, const std::string& key) {
  const std::string s = boost::algorithm::to_lower_copy(trim(raw));
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + s + "'");
}

/// Lattice function syntax: a scalar (constant on every site), a comma list with one value
/// per site, or `<amplitude>*u<k>` for amplitude times the k-th mode function (1-based).
inline LatticeFunction parse_function(const std::string& raw, const std::string& key, const LatticeSpec& spec) {
  const std::string s = trim(raw);
  static const std::regex mode_re(R"(^(.*)\*\s*u(\d+)$)");
  std::smatch m;
  if (std::regex_match(s, m, mode_re)) {
    const Complex amp = parse_complex(m[1].str(), key);
    const long long k = parse_integer(m[2].str(), key);
    if (k < 1 || k > spec.sites)
      throw ConfigError(key + ": mode index must be in 1.." + std::to_string(spec.sites));
    return amp * Lattice(spec).mode(static_cast<int>(k - 1)).cast<Complex>();
  }
  const auto parts = split_list(s);
  if (parts.size() == 1) return LatticeFunction::Constant(spec.sites, parse_complex(parts[0], key));
  if (static_cast<int>(parts.size()) != spec.sites)
    throw ConfigError(key + ": expected 1 or " + std::to_string(spec.sites) + " values, got " +
                      std::to_string(parts.size()));
  LatticeFunction v(spec.sites);
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_complex(parts[i], key);
  return v;
}

class Reader {
 public:
  explicit Reader(const ptree& tree) : tree_(tree) {}

  std::optional<std::string> get(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(section);
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

 private:
  const ptree& tree_;
};

}  // namespace config_detail

/// Parses INI-style text with sections [lattice], [fock], [polynomial], [functions],
/// [evolution], [run] (and [debug]). `overrides` are "section.key" -> value pairs applied on
/// top of the text. Unknown sections or keys are rejected; every physical constraint is
/// checked here.
inline RunConfig parse_config(const std::string& text,
                              const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
  using namespace config_detail;
  ptree tree;
  try {
    std::istringstream in(text);
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [path, value] : overrides) {
    const auto dot = path.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == path.size())
      throw ConfigError(path + ": override must have the form section.key=value");
    tree.put_child(ptree::path_type(path.substr(0, dot) + "\x1f" + path.substr(dot + 1), '\x1f'), ptree(value));
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty()) throw ConfigError(section + ": key outside of any section");
      throw ConfigError("[" + section + "]: unknown section");
    }
    for (const auto& [key, unused] : body) {
      (void)unused;
      if (!it->second.count(key)) throw ConfigError(section + "." + key + ": unknown key");
    }
  }

  const Reader r(tree);
  RunConfig cfg;
  Scenario& sc = cfg.scenario;
  sc.id = r.get("run", "name").value_or("scenario");

  if (auto v = r.get("lattice", "sites")) sc.lattice.sites = static_cast<int>(parse_integer(*v, "lattice.sites"));
  if (auto v = r.get("lattice", "spacing")) sc.lattice.spacing = parse_real(*v, "lattice.spacing");
  if (auto v = r.get("lattice", "mass")) sc.lattice.mass = parse_real(*v, "lattice.mass");
  if (sc.lattice.sites < 1) throw ConfigError("lattice.sites: must be >= 1");
  if (!(sc.lattice.spacing > 0.0)) throw ConfigError("lattice.spacing: must be > 0");
  if (!(sc.lattice.mass > 0.0)) throw ConfigError("lattice.mass: mass must be strictly positive (m > 0)");

  if (auto v = r.get("fock", "n_max")) sc.n_max = static_cast<int>(parse_integer(*v, "fock.n_max"));
  if (auto v = r.get("fock", "probe_cap")) sc.probe_cap = static_cast<int>(parse_integer(*v, "fock.probe_cap"));
  if (sc.n_max < 1) throw ConfigError("fock.n_max: must be >= 1");

  try {
    if (auto v = r.get("polynomial", "coefficients")) {
      Coefficients c;
      for (const auto& part : split_list(*v)) c.push_back(parse_complex(part, "polynomial.coefficients"));
      sc.poly = PolynomialSpec(std::move(c));
    } else if (auto d = r.get("polynomial", "degree")) {
      const auto deg = parse_integer(*d, "polynomial.degree");
      if (deg < 1 || deg % 2 != 0 || deg > 16) throw std::invalid_argument("degree must be even, positive and <= 16");
      sc.poly = PolynomialSpec::monomial(static_cast<int>(deg));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("polynomial: ") + e.what());
  }

  sc.reset_functions(0.01);
  if (auto v = r.get("functions", "lambda")) sc.lambda = parse_function(*v, "functions.lambda", sc.lattice);
  if (auto v = r.get("functions", "f")) sc.f = parse_function(*v, "functions.f", sc.lattice);
  if (auto v = r.get("functions", "h")) sc.h = parse_function(*v, "functions.h", sc.lattice);
  if (auto v = r.get("functions", "g")) sc.g = parse_function(*v, "functions.g", sc.lattice);
  for (Eigen::Index x = 0; x < sc.lambda.size(); ++x)
    if (sc.lambda(x).imag() != 0.0 || sc.lambda(x).real() < 0.0)
      throw ConfigError("functions.lambda: cutoff must be real and >= 0");

  if (auto v = r.get("evolution", "beta")) sc.beta = parse_real(*v, "evolution.beta");
  if (auto v = r.get("evolution", "steps")) sc.evolution.steps = static_cast<int>(parse_integer(*v, "evolution.steps"));
  if (auto v = r.get("evolution", "method")) {
    const std::string m = boost::algorithm::to_lower_copy(*v);
    if (m == "rk4") sc.evolution.method = Method::RK4;
    else if (m == "midpoint") sc.evolution.method = Method::Midpoint;
    else throw ConfigError("evolution.method: expected rk4 or midpoint, got '" + *v + "'");
  }
  if (!(sc.beta > 0.0)) throw ConfigError("evolution.beta: must be > 0");
  if (sc.evolution.steps < 1) throw ConfigError("evolution.steps: must be >= 1");

  if (auto v = r.get("debug", "field_smearing")) sc.fock.field_smearing = parse_real(*v, "debug.field_smearing");

  if (auto v = r.get("run", "seed")) {
    const auto seed = parse_integer(*v, "run.seed");
    if (seed < 0) throw ConfigError("run.seed: must be >= 0");
    sc.seed = static_cast<std::uint64_t>(seed);
  }
  cfg.output = r.get("run", "output").value_or("");
  if (auto v = r.get("run", "format")) {
    const std::string f = boost::algorithm::to_lower_copy(*v);
    if (f == "json") cfg.format = OutputFormat::JSON;
    else if (f == "csv") cfg.format = OutputFormat::CSV;
    else throw ConfigError("run.format: expected json or csv, got '" + *v + "'");
  }
  if (auto v = r.get("run", "timing")) cfg.timing = parse_bool(*v, "run.timing");

  const std::string ids = r.get("run", "identities").value_or("all");
  if (boost::algorithm::to_lower_copy(ids) == "all") {
    cfg.identities = identity_names();
  } else {
    for (const auto& name : split_list(ids)) {
      const auto& known = identity_names();
      if (std::find(known.begin(), known.end(), name) == known.end())
        throw ConfigError("run.identities: unknown identity '" + name + "'");
      cfg.identities.push_back(name);
    }
    if (cfg.identities.empty()) throw ConfigError("run.identities: empty selection");
  }

  cfg.tolerances = default_tolerances();
  for (auto& [name, tol] : cfg.tolerances)
    if (auto v = r.get("run", "tol_" + name)) {
      tol = parse_real(*v, "run.tol_" + name);
      if (!(tol > 0.0)) throw ConfigError("run.tol_" + name + ": must be > 0");
    }

  const int cap = sc.effective_probe_cap();
  if (cap < 0) throw ConfigError("fock.probe_cap: must be >= 0");
  if (cap > sc.n_max - sc.guard_band())
    throw ConfigError("fock.probe_cap: must be <= n_max - degree - 2 = " + std::to_string(sc.n_max - sc.guard_band()) +
                      " (guard band), got " + std::to_string(cap));
  try {
    sc.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

}  // namespace hkx
