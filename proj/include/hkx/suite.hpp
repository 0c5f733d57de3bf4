#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <string>
#include <vector>

#include "hkx/report.hpp"

namespace hkx {

enum ExitCode : int { kExitPass = 0, kExitIdentityFailure = 1, kExitConfigError = 2 };

struct SuiteResult {
  std::vector<VerificationReport> reports;
  std::vector<bool> passed;
  int exit_code = kExitPass;
};

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Runs every selected identity, writes one report file per identity into cfg.output (if
/// set) and prints a summary table. Exit code 0 iff every probe residual is within its
/// tolerance.
inline SuiteResult run_suite(const RunConfig& cfg, std::ostream& summary) {
  SuiteResult result;
  if (!cfg.output.empty()) std::filesystem::create_directories(cfg.output);

  summary << std::left << std::setw(22) << "identity" << std::setw(14) << "residual" << std::setw(12)
          << "tolerance" << std::setw(7) << "result" << "wall_ms\n";
  for (const auto& name : cfg.identities) {
    const VerificationReport r = run_identity(name, cfg.scenario);
    const Real tol = cfg.tolerance(name);
    const bool ok = report_passes(r, tol);
    char residual[32];
    char tolerance[32];
    char wall[32];
    std::snprintf(residual, sizeof residual, "%.3e", r.residual_probe);
    std::snprintf(tolerance, sizeof tolerance, "%.1e", tol);
    std::snprintf(wall, sizeof wall, "%.1f", r.wall_ms);
    summary << std::left << std::setw(22) << name << std::setw(14) << residual << std::setw(12) << tolerance
            << std::setw(7) << (ok ? "PASS" : "FAIL") << wall << "\n";
    if (!ok) {
      summary << "  " << name << " failed: residual_probe " << residual << " > tolerance " << tolerance;
      for (const auto& [k, v] : r.details) summary << ", " << k << "=" << v;
      summary << "\n";
      result.exit_code = kExitIdentityFailure;
    }
    if (!cfg.output.empty()) {
      const std::filesystem::path dir(cfg.output);
      if (cfg.format == OutputFormat::JSON)
        write_text_file(dir / (name + ".json"), report_json(cfg.scenario, r, tol, cfg.timing).dump(2) + "\n");
      else
        write_text_file(dir / (name + ".csv"), report_csv(r, tol, cfg.timing));
    }
    result.reports.push_back(r);
    result.passed.push_back(ok);
  }
  return result;
}

/// Config text of the generic interacting scenario shipped by `demo`.
inline std::string demo_config_text() {
  return R"([lattice]
sites = 1
spacing = 1
mass = 1

[fock]
n_max = 14

[polynomial]
degree = 4

[functions]
lambda = 0.01
f = 0.15*u1
h = 0.15*u1
g = 0

[evolution]
beta = 0.25
steps = 400
method = rk4

[run]
name = generic
identities = all
)";
}

}  // namespace hkx
