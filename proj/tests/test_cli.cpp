#include <doctest.h>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kinop/control.hpp"
#include "kinop/errors.hpp"
#include "kinop/runner.hpp"
#include "kinop/scenario.hpp"
#include "support/generators.hpp"

using namespace kinop;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kinop_test_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json summary(const fs::path& dir) { return nlohmann::json::parse(slurp(dir / "summary.json")); }

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(KINOP_CLI_PATH) + " " + args + " --quiet > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kMinimal = "[scenario]\nsolver = fp-h\n[run]\nt_final = 1\n";

const char* kTwoRegime =
    "[scenario]\nsolver = fp-h\n"
    "[params]\nlambda_p = 0.5\nsigma2_p = 0.02\n"
    "[run]\nt_final = 0\n"
    "[classify]\nrho_bar = 0.65\nm_bar = 0\n";

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const Scenario s = parse_config_text(kMinimal);
  CHECK(s.solver == Solver::FpH);
  CHECK(s.model == Model::Uncontrolled);
  CHECK(s.run.t_final == 1.0);
  CHECK(s.params.a_p == default_fade(s.params.omega_p, s.params.eps_floor));
  CHECK(s.params.a_l == default_fade(s.params.omega_l, s.params.eps_floor));
}

TEST_CASE("config errors name the section and key") {
  auto message = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  const std::string big = message(std::string(kMinimal) + "[params]\nomega_p = 0.96\n");
  CHECK(big.find("[params]") != std::string::npos);
  CHECK(big.find("omega_p + eps_floor < 1") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "[params]\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(message("[scenario]\nsolver = fp-h\nsolver = mc\n[run]\nt_final = 1\n").find("duplicate") !=
        std::string::npos);
  CHECK(message("[scenario]\nsolver = fp-h\n").find("[run] t_final") != std::string::npos);
  CHECK(message("[run]\nt_final = 1\n").find("[scenario] solver") != std::string::npos);
  CHECK(message("[nowhere]\n").find("unknown section") != std::string::npos);
  CHECK(message(std::string(kMinimal) + "[params]\ntheta = abc\n").find("theta") != std::string::npos);
}

TEST_CASE("parse, serialize, parse is the identity") {
  const Scenario a = parse_config_text(kTwoRegime);
  const std::string text = serialize_config(a);
  const Scenario b = parse_config_text(text);
  CHECK(a == b);
  CHECK(serialize_config(b) == text);

  gen::Gen g(81);
  const char* solvers[] = {"mc", "fp-h", "fp-g", "fp-2d", "characteristics"};
  for (int k = 0; k < 200; ++k) {
    Scenario s = parse_config_text(kMinimal);
    s.params = g.params();
    s.solver = parse_config_text(std::string("[scenario]\nsolver = ") + solvers[g.integer(0, 4)] +
                                 "\n[run]\nt_final = 1\n")
                   .solver;
    s.model = g.coin(0.5) ? Model::Controlled : Model::Uncontrolled;
    s.channels = s.solver == Solver::Mc ? Channels::Agents : (g.coin(0.5) ? Channels::Both : Channels::Leaders);
    s.run.t_final = g.uniform(1, 50);
    s.run.snapshots = {s.run.t_final * 0.25, s.run.t_final * 0.5};
    s.run.seed = static_cast<std::uint64_t>(g.integer(0, 1 << 30)) * 4099u;
    s.initial.kind = InitialSpec::Kind::Beta;
    s.initial.b1 = g.uniform(0.1, 9);
    s.initial.b2 = g.uniform(0.1, 9);
    if (g.coin(0.5)) {
      s.classify.rho_bar = g.uniform(0.1, 0.9);
      s.classify.m_bar = g.uniform(-0.09, 0.09);
    }
    if (g.coin(0.3)) s.influence = "bounded:" + format_double(g.uniform(0.1, 2));
    CAPTURE(k);
    const std::string t1 = serialize_config(s);
    const Scenario back = parse_config_text(t1);
    CHECK(back == s);
    CHECK(serialize_config(back) == t1);
  }
}

TEST_CASE("format_double round-trips") {
  gen::Gen g(82);
  for (int k = 0; k < 10000; ++k) {
    const double x = std::ldexp(g.uniform(-1, 1), static_cast<int>(g.integer(-60, 60)));
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("simulate writes the artifact bundle with conservation residuals") {
  const fs::path dir = scratch("simulate");
  Scenario s = parse_config_text(
      "[scenario]\nsolver = fp-h\nchannels = both\n[run]\nt_final = 2\nsnapshots = 1\n[grid]\nw_cells = 100\n");
  run_command(Command::Simulate, s, dir.string());
  for (const char* f : {"macros.csv", "diagnostics.csv", "summary.json", "config.ini", "snapshots/h_000.csv"})
    CHECK(fs::exists(dir / f));
  const std::string csv = slurp(dir / "macros.csv");
  CHECK(csv.rfind("t,rho_a,rho_u,rho_i,m_w,m_A,rho_bar,m_bar,H,D,I_H,L1\n", 0) == 0);
  const auto js = summary(dir);
  CHECK(js["command"] == "simulate");
  CHECK(js["conservation"]["mass_relative"].get<double>() <= 1e-11);
  CHECK(js["snapshots"].size() == 2);
  CHECK(parse_config((dir / "config.ini").string()) == s);
}

TEST_CASE("mc simulate keeps the population") {
  const fs::path dir = scratch("mc");
  const Scenario s = parse_config_text(
      "[scenario]\nsolver = mc\n[params]\nqi_scale = 0.05\n[run]\nt_final = 1\nagents = 500\n");
  run_command(Command::Simulate, s, dir.string());
  const auto js = summary(dir);
  CHECK(js["conservation"]["agents_initial"] == 500);
  CHECK(js["conservation"]["agents_final"] == 500);
  CHECK(js["steps"] == 20);
}

TEST_CASE("classify reports the mixed regime of the two-regime example") {
  const fs::path dir = scratch("classify");
  run_command(Command::Classify, parse_config_text(kTwoRegime), dir.string());
  const auto js = summary(dir);
  CHECK(js["moments"]["source"] == "config");
  CHECK(js["regime"]["mixed"] == true);
  CHECK(js["regime"]["regime_inactive"] == "polarization");
  CHECK(js["regime"]["regime_active"] == "consensus");
  CHECK(js["regime"]["A_star_weight"].get<double>() == doctest::Approx(1.25 * (0.04 / 0.65) - 0.0625));
  CHECK(fs::exists(dir / "partial_active.csv"));
}

TEST_CASE("feasibility of the balanced control has zero fluxes") {
  Scenario s = parse_config_text(std::string(kMinimal) +
                                 "[params]\ntheta = 0.3\nlambda_A = 0.1\nomega_p = 0.8\neps_floor = 0.05\n");
  s.params.lambda_c = balanced_lambda_c(s.params);
  const fs::path dir = scratch("feasibility");
  run_command(Command::Feasibility, parse_config_text(serialize_config(s)), dir.string());
  const auto js = summary(dir);
  CHECK(js["feasibility"]["C_i"].get<double>() == 0.0);
  CHECK(js["feasibility"]["C_a"].get<double>() == 0.0);
  CHECK(js["feasibility"]["verdict"] == "ineffective");
}

TEST_CASE("equilibrium reports the global Beta state") {
  const fs::path dir = scratch("equilibrium");
  const Scenario s = parse_config_text(
      "[scenario]\nsolver = fp-h\nchannels = both\n[params]\nmu_l = 0.3\n[run]\nt_final = 0\n");
  run_command(Command::Equilibrium, s, dir.string());
  const auto js = summary(dir);
  CHECK(js["global"]["mean"].get<double>() == doctest::Approx(0.3).epsilon(1e-9));
  CHECK(fs::exists(dir / "equilibrium.csv"));
}

TEST_CASE("reruns are byte-identical") {
  const Scenario s = parse_config_text(
      "[scenario]\nsolver = mc\n[params]\nqi_scale = 0.1\n[run]\nt_final = 1\nagents = 400\nsnapshots = 0.5\n"
      "[compare]\nfirst = mc\nsecond = fp-h\nbins = 20\n[grid]\nw_cells = 100\n");
  for (const Command c : {Command::Simulate, Command::Compare}) {
    const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
    run_command(c, s, a.string());
    run_command(c, s, b.string());
    std::size_t files = 0;
    for (const auto& e : fs::recursive_directory_iterator(a)) {
      if (!e.is_regular_file()) continue;
      const fs::path rel = fs::relative(e.path(), a);
      CAPTURE(rel.string());
      CHECK(slurp(e.path()) == slurp(b / rel));
      ++files;
    }
    CHECK(files >= 4);
  }
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("exit");
  const std::string out = " --out " + (dir / "run").string();

  write_file(dir / "ok.ini", kTwoRegime);
  CHECK(run_cli("classify --config " + (dir / "ok.ini").string() + out) == 0);
  CHECK(run_cli("feasibility --config " + (dir / "ok.ini").string() + out + " --seed 7") == 0);

  CHECK(run_cli("simulate --config " + (dir / "missing.ini").string() + out) == 2);
  write_file(dir / "bad.ini", std::string(kMinimal) + "[params]\nomega_p = 0.99\n");
  CHECK(run_cli("simulate --config " + (dir / "bad.ini").string() + out) == 2);
  CHECK(run_cli("simulate" + out) == 2);
  CHECK(run_cli("frobnicate --config x" + out) == 2);

  write_file(dir / "cfl.ini", "[scenario]\nsolver = fp-g\n[run]\nt_final = 20\ndt = 10\n");
  CHECK(run_cli("simulate --config " + (dir / "cfl.ini").string() + out) == 3);
  const auto js = summary(dir / "run");
  CHECK(js["command"] == "error");
  CHECK(js["failed_step"] == 0);

  write_file(dir / "ctl.ini",
             "[scenario]\nsolver = fp-g\nmodel = controlled\n[params]\ntheta = 0.3\na_p = 0.9\n[run]\nt_final = 1\n");
  CHECK(run_cli("simulate --config " + (dir / "ctl.ini").string() + out) == 4);
  CHECK(run_cli("feasibility --config " + (dir / "ctl.ini").string() + out) == 0);
}
