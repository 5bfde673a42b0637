// Command-line front end: kinop <simulate|classify|feasibility|equilibrium|compare> --config PATH --out DIR
//
// Exit codes: 0 success, 2 configuration error, 3 solver error, 4 infeasible control.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "kinop/errors.hpp"
#include "kinop/runner.hpp"
#include "kinop/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kSolverError = 3;
constexpr int kInfeasibleControl = 4;

struct Options {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "Scenario file (INI sections of key = value)")->required();
  sub->add_option("--out", opt.out, "Run directory to create or overwrite")->required();
  sub->add_option("--seed", opt.seed, "Override [run] seed");
  sub->add_flag("--quiet", opt.quiet, "Suppress progress messages");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic opinion dynamics with social activity"};
  app.require_subcommand(1);
  Options opt;
  const std::pair<const char*, const char*> commands[] = {
      {"simulate", "Run the configured solver and write the output bundle"},
      {"classify", "Classify the polarization regime and emit partial equilibrium tables"},
      {"feasibility", "Report flux coefficients, admissible control intervals and the verdict"},
      {"equilibrium", "Emit the global and local Beta equilibria and regularity indices"},
      {"compare", "Run two solvers on the same scenario and report L1 distances of their marginals"}};
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  const kinop::Command command = *kinop::parse_command(name);
  try {
    kinop::Scenario s = kinop::parse_config(opt.config);
    if (opt.seed) s.run.seed = *opt.seed;
    kinop::run_command(command, s, opt.out);
    if (!opt.quiet) std::cerr << "kinop " << name << ": wrote " << opt.out << "\n";
    return kOk;
  } catch (const kinop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const kinop::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const kinop::InfeasibleControl& e) {
    std::cerr << "infeasible control: " << e.what() << "\n";
    return kInfeasibleControl;
  } catch (const kinop::SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return kSolverError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverError;
  }
}
