#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kinop/equilibria.hpp"
#include "kinop/grid.hpp"
#include "kinop/macros.hpp"
#include "kinop/mc.hpp"
#include "kinop/scenario.hpp"

namespace kinop {

enum class Command { Simulate, Classify, Feasibility, Equilibrium, Compare };
std::optional<Command> parse_command(const std::string& name);

// Initial data of a scenario on its grids, or as an ensemble of run.agents agents.
Grid1D initial_opinion(const Scenario& s);
Grid1D initial_activity(const Scenario& s);
Ensemble initial_ensemble(const Scenario& s);

// Distances of the opinion marginal to the global equilibrium; NaN when undefined.
struct Functionals {
  double H;
  double D;
  double I_H;
  double L1;
};

struct Snapshot {
  double t;
  std::optional<Grid1D> h;
  std::optional<Grid1D> g;
};

struct SimulationResult {
  std::vector<Macros> series;
  std::vector<Functionals> functionals;  // one per series entry
  std::vector<double> mass;              // one per series entry
  std::vector<Snapshot> snapshots;       // requested times, then the final state
  std::optional<BetaEquilibrium> reference;
  long steps = 0;
  double dt = 0.0;
  long agents_initial = 0;
  long agents_final = 0;
};

// Runs the scenario's solver. Throws InfeasibleControl for a controlled model
// whose control is not effective, SolverError with the failing step otherwise.
SimulationResult simulate(const Scenario& s);

// L1 distance of two opinion grids after averaging groups of cells into `bins` bins.
double binned_l1(const Grid1D& a, const Grid1D& b, long bins);
// L1 distance of two activity grids with equal cell width and aligned edges,
// padding each with zeros to the union of their ranges.
double aligned_l1(const Grid1D& a, const Grid1D& b);

// Writes the artifact bundle of `command` into out_dir (created if needed).
// On SolverError the summary records the failing step before the error propagates.
void run_command(Command command, const Scenario& s, const std::string& out_dir);

}  // namespace kinop
