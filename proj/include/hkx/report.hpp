#pragma once

#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hkx/config.hpp"

namespace hkx {

using json = nlohmann::ordered_json;

namespace report_detail {

inline json complex_list(const LatticeFunction& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

inline json complex_list(const Coefficients& c) {
  json out = json::array();
  for (const auto& z : c) out.push_back({z.real(), z.imag()});
  return out;
}

/// Shortest round-trip decimal, identical to the JSON encoding.
inline std::string number(Real x) { return json(x).dump(); }

}  // namespace report_detail

/// Echo of every scenario parameter that influences the residuals.
inline json scenario_json(const Scenario& sc) {
  using report_detail::complex_list;
  json j;
  j["id"] = sc.id;
  j["lattice"] = {{"sites", sc.lattice.sites}, {"spacing", sc.lattice.spacing}, {"mass", sc.lattice.mass}};
  j["fock"] = {{"n_max", sc.n_max}, {"probe_cap", sc.effective_probe_cap()}};
  j["polynomial"] = {{"coefficients", complex_list(sc.poly.coefficients())}};
  j["functions"] = {{"lambda", complex_list(sc.lambda)},
                    {"f", complex_list(sc.f)},
                    {"h", complex_list(sc.h)},
                    {"g", complex_list(sc.g)}};
  j["evolution"] = {{"beta", sc.beta},
                    {"steps", sc.evolution.steps},
                    {"method", sc.evolution.method == Method::RK4 ? "rk4" : "midpoint"}};
  j["seed"] = sc.seed;
  if (sc.fock.field_smearing != FockOptions{}.field_smearing) j["debug"] = {{"field_smearing", sc.fock.field_smearing}};
  return j;
}

inline bool report_passes(const VerificationReport& r, Real tolerance) {
  return r.residual_probe <= tolerance;
}

inline json report_json(const Scenario& sc, const VerificationReport& r, Real tolerance, bool timing) {
  json j;
  j["scenario"] = scenario_json(sc);
  j["identity"] = r.identity;
  j["residual_probe"] = r.residual_probe;
  j["residual_compressed"] = r.residual_compressed;
  j["tolerance"] = tolerance;
  j["pass"] = report_passes(r, tolerance);
  j["convergence"] = r.convergence;
  j["details"] = r.details;
  if (timing) j["wall_ms"] = r.wall_ms;
  return j;
}

inline std::string report_csv(const VerificationReport& r, Real tolerance, bool timing) {
  using report_detail::number;
  std::ostringstream out;
  out << "scenario,identity,residual_probe,residual_compressed,tolerance,pass";
  if (timing) out << ",wall_ms";
  out << "\n"
      << r.scenario_id << "," << r.identity << "," << number(r.residual_probe) << "," << number(r.residual_compressed)
      << "," << number(tolerance) << "," << (report_passes(r, tolerance) ? "true" : "false");
  if (timing) out << "," << number(r.wall_ms);
  out << "\n";
  return out.str();
}

/// Plot-ready CSV of a convergence series.
inline std::string convergence_csv(const VerificationReport& r, const std::vector<std::string>& columns) {
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : r.convergence) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << report_detail::number(row[i]);
    out << "\n";
  }
  return out.str();
}

}  // namespace hkx
