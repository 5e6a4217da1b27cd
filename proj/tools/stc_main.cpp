#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stc/analysis.hpp"
#include "stc/config.hpp"
#include "stc/experiments.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  const stc::ExperimentConfig cfg = stc::load_config(config_path);
  const stc::RunResult res = stc::run_experiment(cfg);
  stc::write_run_outputs(out_dir, cfg, res);
  for (const auto& [k, v] : stc::summary_lines(res)) std::cout << k << '=' << v << '\n';
  return res.violations() == 0 ? kOk : kViolation;
}

int cmd_montecarlo(const std::string& config_path, const std::string& out_dir) {
  const stc::ExperimentConfig cfg = stc::load_config(config_path);
  if (cfg.montecarlo.trials == 0) throw stc::ConfigError("montecarlo.trials", "Monte Carlo block missing");
  const stc::MonteCarloResult res = stc::run_montecarlo(cfg);
  stc::write_montecarlo_outputs(out_dir, cfg, res);
  std::cout << "family,n,A_MLA,A_MND,A_MDEC\n";
  for (const auto& p : res.points) {
    std::cout << stc::to_string(p.family) << ',' << p.n << ',' << stc::format_double(p.report.a_mla) << ','
              << stc::format_double(p.report.a_mnd) << ',' << stc::format_double(p.report.a_mdec) << '\n';
  }
  std::cout << "violations=" << res.violations() << '\n';
  return res.violations() == 0 ? kOk : kViolation;
}

int cmd_bounds(double eps, double chi0, std::size_t d_max, double w_bound, double tau_max) {
  const stc::BoundsReport b = stc::compute_bounds(eps, chi0, d_max, w_bound, tau_max);
  std::cout << "eps=" << stc::format_double(b.eps) << '\n'
            << "chi0=" << stc::format_double(b.chi0) << '\n'
            << "d_max=" << b.d_max << '\n'
            << "w_bound=" << stc::format_double(b.w_bound) << '\n'
            << "tau_max=" << stc::format_double(b.tau_max) << '\n'
            << "r=" << stc::format_double(b.r) << '\n'
            << "gamma=" << stc::format_double(b.gamma) << '\n'
            << "r_bar=" << stc::format_double(b.r_bar) << '\n'
            << "gamma_bar=" << stc::format_double(b.gamma_bar) << '\n';
  return kOk;
}

int cmd_oracle(const std::string& config_path, double dt, std::optional<double> tol) {
  const stc::ExperimentConfig cfg = stc::load_config(config_path);
  const stc::OracleCheckResult res = stc::oracle_check(cfg, dt, tol);
  std::cout << "dt=" << stc::format_double(res.dt) << '\n'
            << "tolerance=" << stc::format_double(res.tolerance) << '\n'
            << "max_deviation=" << stc::format_double(res.deviation) << '\n'
            << "first_exceeded=" << (res.first_exceeded ? stc::format_double(*res.first_exceeded) : "none")
            << '\n'
            << "result=" << (res.passed() ? "pass" : "fail") << '\n';
  return res.passed() ? kOk : kViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Self-triggered consensus simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  auto* run = app.add_subcommand("run", "Simulate one configuration and check its invariants");
  run->add_option("config", config_path, "Config file (or any output file with an embedded config)")
      ->required();
  run->add_option("-o,--output", out_dir, "Output directory");

  auto* mc = app.add_subcommand("montecarlo", "Run a Monte Carlo campaign");
  mc->add_option("config", config_path, "Config file")->required();
  mc->add_option("-o,--output", out_dir, "Output directory");

  double eps = 0.0, chi0 = 0.0, w_bound = 0.0, tau_max = 0.0;
  std::size_t d_max = 0;
  auto* bounds = app.add_subcommand("bounds", "Print the closed-form radii");
  bounds->add_option("--eps", eps)->required();
  bounds->add_option("--chi0", chi0)->required();
  bounds->add_option("--dmax", d_max)->required();
  bounds->add_option("--wbound", w_bound)->required();
  bounds->add_option("--taumax", tau_max);

  double dt = 0.0;
  std::optional<double> tolerance;
  auto* oracle = app.add_subcommand("oracle-check", "Compare against the fixed-step integrator");
  oracle->add_option("config", config_path, "Config file")->required();
  oracle->add_option("--dt", dt, "Integrator step")->required();
  oracle->add_option("--tol", tolerance, "Deviation tolerance (default 10 dt)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config_path, out_dir);
    if (*mc) return cmd_montecarlo(config_path, out_dir);
    if (*bounds) return cmd_bounds(eps, chi0, d_max, w_bound, tau_max);
    if (*oracle) return cmd_oracle(config_path, dt, tolerance);
  } catch (const stc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
