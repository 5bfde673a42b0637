#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kinop/core.hpp"
#include "kinop/fp.hpp"

namespace kinop {

enum class Model { Uncontrolled, Controlled };
enum class Solver { Mc, FpH, FpG, Fp2d, Characteristics };

std::string to_string(Model m);
std::string to_string(Solver s);
std::string to_string(MeanMode m);

struct InitialSpec {
  enum class Kind { Uniform, Beta, Point, Table };
  Kind kind = Kind::Uniform;
  // Opinion box of the uniform family.
  double w_min = -1.0;
  double w_max = 1.0;
  // Activity box shared by the uniform, beta and table families.
  double a_min = -2.0;
  double a_max = 2.0;
  // Opinion density proportional to (1-w)^(b1-1) (1+w)^(b2-1).
  double b1 = 2.0;
  double b2 = 2.0;
  double w0 = 0.0;
  double a0 = 0.0;
  // Absolute path of a two-column CSV (w, density) giving the opinion marginal.
  std::string table;
  std::vector<double> table_w;
  std::vector<double> table_density;

  bool operator==(const InitialSpec&) const = default;
};

struct RunSpec {
  double t_final = 0.0;
  double output_every = 0.0;  // 0 records every step
  std::vector<double> snapshots;
  std::uint64_t seed = 1;
  long agents = 10000;
  double dt = 0.0;  // 0 selects the solver default

  bool operator==(const RunSpec&) const = default;
};

struct GridSpec {
  long w_cells = 200;
  int a_cells_per_gamma = 20;
  double a_min = -4.0;
  double a_max = 4.0;

  bool operator==(const GridSpec&) const = default;
};

struct LeaderSpec {
  enum class Kind { Point, Beta };
  Kind kind = Kind::Point;
  // Beta leaders use exponents concentration (1 -+ mu_l), so their mean is mu_l.
  double concentration = 20.0;

  bool operator==(const LeaderSpec&) const = default;
};

struct CompareSpec {
  Solver first = Solver::Mc;
  Solver second = Solver::FpH;
  long bins = 50;

  bool operator==(const CompareSpec&) const = default;
};

struct ClassifySpec {
  std::optional<double> rho_bar;
  std::optional<double> m_bar;

  bool operator==(const ClassifySpec&) const = default;
};

struct Scenario {
  Model model = Model::Uncontrolled;
  Channels channels = Channels::Agents;
  Solver solver = Solver::FpH;
  MeanMode mean_mode = MeanMode::SelfConsistent;
  ModelParams params;
  std::string influence = "unit";  // "unit" or "bounded:<radius>"
  InitialSpec initial;
  RunSpec run;
  GridSpec grid;
  LeaderSpec leaders;
  CompareSpec compare;
  ClassifySpec classify;

  InteractionKernels kernels() const;
  bool operator==(const Scenario&) const = default;
};

// Parses `key = value` lines grouped under [section] headers; '#' and ';' start
// comments. Relative table paths resolve against `base_dir`. Throws ConfigError
// naming the offending section and key.
Scenario parse_config_text(const std::string& text, const std::string& base_dir = ".");
Scenario parse_config(const std::string& path);

// Canonical form listing every key; parse_config_text inverts it exactly.
std::string serialize_config(const Scenario& s);

// Cross-field checks; parse_config_text calls it on every result.
void validate(const Scenario& s);

// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

}  // namespace kinop
