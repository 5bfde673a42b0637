#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kinop/core.hpp"
#include "kinop/grid.hpp"
#include "kinop/macros.hpp"
#include "kinop/micro.hpp"
#include "kinop/rng.hpp"

namespace kinop {

// Finite population; N is even and constant.
struct Ensemble {
  std::vector<AgentState> agents;
  std::uint64_t rng_seed = 0;
  double time = 0.0;
  std::uint64_t step = 0;
  // Running sum of (D(w) eta)^2 over all opinion noise increments, the quadratic
  // variation of the noise part of the ensemble mean times N^2.
  double noise_qv = 0.0;
};

class LeaderDistribution {
 public:
  enum class Kind { Point, Beta, Empirical };

  static LeaderDistribution point(double mu);
  // Density proportional to (1-z)^(b1-1) (1+z)^(b2-1) on [-1,1].
  static LeaderDistribution beta(double b1, double b2);
  static LeaderDistribution empirical(std::vector<double> samples);

  Kind kind() const { return kind_; }
  double mean() const { return mean_; }
  double b1() const { return b1_; }
  double b2() const { return b2_; }
  double sample(CounterRng& rng) const;

 private:
  Kind kind_ = Kind::Point;
  double mean_ = 0.0;
  double b1_ = 0.0;
  double b2_ = 0.0;
  std::vector<double> samples_;
};

// One scaled interaction round, dt = qi_scale: random perfect matching with an
// agent-agent encounter per pair, then one leader encounter per agent when
// leaders are present. When controlled, each agent independently takes the
// contraction A(1 - qi_scale lambda_c / 2) with probability theta in place of
// its encounter-driven activity increments.
Ensemble mc_step(Ensemble ens, const ModelParams& params, const InteractionKernels& kernels,
                 const std::optional<LeaderDistribution>& leaders, bool controlled, double dt);

// Normalized histogram on uniform edges. Activity samples outside the edges
// extend the range by whole cells; opinion edges must cover [-1,1].
Grid1D bin_marginal(const Ensemble& ens, Axis axis, const Eigen::ArrayXd& edges);

struct McConfig {
  ModelParams params;
  InteractionKernels kernels = InteractionKernels::standard();
  std::optional<LeaderDistribution> leaders;
  bool controlled = false;
  Ensemble initial;
  double t_final = 0.0;
  long record_every = 1;  // steps between recorded Macros
  std::vector<double> snapshot_times;
  Eigen::ArrayXd w_edges;
  Eigen::ArrayXd a_edges;
  // Called with the ensemble each time Macros are recorded.
  std::function<void(const Ensemble&)> on_record;
};

struct McSnapshot {
  double t;
  Grid1D h;
  Grid1D g;
};

struct McRun {
  std::vector<Macros> series;
  std::vector<McSnapshot> snapshots;
  Ensemble final_state;
  long steps = 0;
};

// Throws ConfigError before stepping if the configuration is invalid.
McRun run_mc(const McConfig& config);

}  // namespace kinop
