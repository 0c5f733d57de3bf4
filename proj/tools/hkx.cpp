// Command-line front end: verify a scenario, sweep convergence axes, or run the demo.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hkx/suite.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw hkx::ConfigError("cannot read config file '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Leftover arguments of the form --section.key=value.
std::vector<std::pair<std::string, std::string>> collect_overrides(const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& arg : extras) {
    if (arg.rfind("--", 0) != 0) throw hkx::ConfigError("unexpected argument '" + arg + "'");
    const auto eq = arg.find('=');
    if (eq == std::string::npos) throw hkx::ConfigError("override '" + arg + "' must look like --section.key=value");
    out.emplace_back(arg.substr(2, eq - 2), arg.substr(eq + 1));
  }
  return out;
}

std::vector<int> parse_levels(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (const auto& part : hkx::config_detail::split_list(text))
    out.push_back(static_cast<int>(hkx::config_detail::parse_integer(part, what)));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exchange-identity checks for truncated bosonic heat kernels"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string format;

  auto* verify = app.add_subcommand("verify", "run the selected identity checks for one scenario");
  verify->add_option("config", config_path, "scenario config file")->required();
  verify->add_option("-o,--output", output, "report directory (overrides run.output)");
  verify->add_option("--format", format, "json or csv (overrides run.format)");
  verify->allow_extras();

  std::string axis = "cutoff";
  std::string identity = "exchange";
  std::string n_max_levels = "8,12,16";
  std::string steps_levels = "100,200,400,800";
  auto* sweep = app.add_subcommand("sweep", "convergence sweep over n_max and/or steps; emits CSV");
  sweep->add_option("config", config_path, "scenario config file")->required();
  sweep->add_option("--axis", axis, "cutoff, steps or both")->check(CLI::IsMember({"cutoff", "steps", "both"}));
  sweep->add_option("--identity", identity, "identity to re-run")->check(CLI::IsMember(hkx::identity_names()));
  sweep->add_option("--n-max", n_max_levels, "comma-separated n_max levels");
  sweep->add_option("--steps", steps_levels, "comma-separated step counts");
  sweep->add_option("-o,--output", output, "CSV file (default: stdout)");
  sweep->allow_extras();

  auto* demo = app.add_subcommand("demo", "run every identity on the built-in generic scenario");
  demo->add_option("-o,--output", output, "report directory");
  demo->add_option("--format", format, "json or csv");
  demo->allow_extras();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hkx::kExitConfigError;
  }

  hkx::RunConfig cfg;
  try {
    CLI::App* active = app.get_subcommands().front();
    auto overrides = collect_overrides(active->remaining());
    if (!output.empty() && active != sweep) overrides.emplace_back("run.output", output);
    if (!format.empty()) overrides.emplace_back("run.format", format);
    const std::string text = active == demo ? hkx::demo_config_text() : read_file(config_path);
    cfg = hkx::parse_config(text, overrides);
  } catch (const hkx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hkx::kExitConfigError;
  }

  try {
    if (sweep->parsed()) {
      hkx::SweepLevels levels;
      hkx::SweepAxis ax = hkx::SweepAxis::Cutoff;
      std::vector<std::string> columns{"n_max", "residual"};
      if (axis == "cutoff") {
        levels.n_max = parse_levels(n_max_levels, "--n-max");
      } else if (axis == "steps") {
        ax = hkx::SweepAxis::Steps;
        levels.steps = parse_levels(steps_levels, "--steps");
        columns = {"steps", "residual"};
      } else {
        ax = hkx::SweepAxis::Both;
        levels.n_max = parse_levels(n_max_levels, "--n-max");
        levels.steps = parse_levels(steps_levels, "--steps");
        columns = {"n_max", "steps", "residual"};
      }
      for (int n : levels.n_max) {
        hkx::Scenario probe = cfg.scenario;
        probe.n_max = n;
        probe.validate();
      }
      const auto report = hkx::convergence_sweep(cfg.scenario, identity, ax, levels);
      const std::string csv = hkx::convergence_csv(report, columns);
      if (output.empty()) std::cout << csv;
      else hkx::write_text_file(output, csv);
      const bool monotone = report.details.at("monotone") != 0.0;
      std::cerr << identity << " sweep: " << (monotone ? "decreasing" : "NOT decreasing") << "\n";
      return monotone ? hkx::kExitPass : hkx::kExitIdentityFailure;
    }
    return hkx::run_suite(cfg, std::cout).exit_code;
  } catch (const hkx::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hkx::kExitConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hkx::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hkx::kExitIdentityFailure;
  }
}
