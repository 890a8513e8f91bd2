#include <CLI11.hpp>

#include <exception>
#include <iostream>

#include "pks/config.hpp"
#include "pks/experiment.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kSolverFailure = 3;

void print_report(const pks::StepReport& r) {
  std::cerr << "  newton iterations: " << r.newton_iterations
            << "\n  final residual: " << r.final_residual
            << "\n  damping events: " << r.damping_events
            << "\n  linear iterations: " << r.linear_iterations
            << "\n  descent iterations: " << r.descent_iterations
            << "\n  fallback used: " << (r.used_fallback ? "yes" : "no") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Positivity- and energy-preserving solver for the parabolic-parabolic "
               "Keller-Segel system"};
  app.require_subcommand(1);
  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "Integrate one configuration to T");
  auto* sweep_cmd = app.add_subcommand("sweep", "Manufactured-solution convergence sweep");
  auto* check_cmd = app.add_subcommand("check", "Validate a configuration without running");
  for (auto* cmd : {run_cmd, sweep_cmd, check_cmd})
    cmd->add_option("config", config_path, "Configuration file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  pks::RunConfig cfg;
  try {
    cfg = pks::load_config(config_path);
    if (*sweep_cmd && cfg.sweep_n.empty())
      throw pks::ConfigError(config_path + ": sweep requires sweep.N");
  } catch (const pks::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    if (*check_cmd) {
      std::cout << "ok: " << cfg.entropy.describe() << ", dim " << cfg.dim << ", N " << cfg.n
                << ", dt " << cfg.scheme.dt << ", T " << cfg.final_time << '\n';
      return 0;
    }
    if (*run_cmd) pks::run(cfg, std::cout);
    if (*sweep_cmd) {
      const auto table = pks::sweep(cfg, std::cout);
      pks::write_convergence(std::cout, table);
    }
  } catch (const pks::SimulationError& e) {
    std::cerr << "solver failure at " << e.what() << '\n';
    print_report(e.report());
    return kSolverFailure;
  } catch (const pks::DomainError& e) {
    std::cerr << "invalid initial data: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolverFailure;
  }
  return 0;
}
