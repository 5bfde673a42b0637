#include "kinop/mc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "kinop/diagnostics.hpp"

namespace kinop {

LeaderDistribution LeaderDistribution::point(double mu) {
  if (!(mu >= -1.0 && mu <= 1.0)) throw ConfigError("leader opinion must lie in [-1,1]");
  LeaderDistribution d;
  d.kind_ = Kind::Point;
  d.mean_ = mu;
  return d;
}

LeaderDistribution LeaderDistribution::beta(double b1, double b2) {
  if (!(b1 > 0.0) || !(b2 > 0.0)) throw ConfigError("leader Beta exponents must be positive");
  LeaderDistribution d;
  d.kind_ = Kind::Beta;
  d.b1_ = b1;
  d.b2_ = b2;
  d.mean_ = (b2 - b1) / (b1 + b2);
  return d;
}

LeaderDistribution LeaderDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw ConfigError("empirical leader distribution needs samples");
  for (double z : samples)
    if (!(z >= -1.0 && z <= 1.0)) throw ConfigError("leader opinion must lie in [-1,1]");
  LeaderDistribution d;
  d.kind_ = Kind::Empirical;
  d.mean_ = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
  d.samples_ = std::move(samples);
  return d;
}

double LeaderDistribution::sample(CounterRng& rng) const {
  switch (kind_) {
    case Kind::Point: return mean_;
    case Kind::Beta: {
      // x = X/(X+Y) with X ~ Gamma(b2), Y ~ Gamma(b1) is Beta(b2, b1) on [0,1].
      std::gamma_distribution<double> gx(b2_, 1.0), gy(b1_, 1.0);
      const double x = gx(rng), y = gy(rng);
      return std::clamp(2.0 * x / (x + y) - 1.0, -1.0, 1.0);
    }
    case Kind::Empirical: return samples_[rng.below(samples_.size())];
  }
  return mean_;
}

namespace {

// Reserved stream index for the pairing permutation.
constexpr std::uint64_t kPairingStream = ~std::uint64_t{0};

bool bernoulli(CounterRng& rng, double p) { return rng.uniform() < p; }

}  // namespace

Ensemble mc_step(Ensemble ens, const ModelParams& params, const InteractionKernels& kernels,
                 const std::optional<LeaderDistribution>& leaders, bool controlled, double dt) {
  params.validate();
  if (std::abs(dt - params.qi_scale) > 1e-12 * params.qi_scale)
    throw ConfigError("mc_step: dt must equal qi_scale");
  const std::size_t n = ens.agents.size();
  if (n % 2 != 0) throw ConfigError("mc_step: ensemble size must be even");
  const ModelParams sp = params.scaled();

  std::vector<std::uint32_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0u);
  CounterRng pair_rng(ens.rng_seed, ens.step, kPairingStream);
  for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[pair_rng.below(i)]);

  const std::vector<AgentState> pre = ens.agents;
  double qv = 0.0;
  for (std::size_t k = 0; k + 1 < n; k += 2) {
    const std::uint32_t ia = perm[k], ib = perm[k + 1];
    CounterRng ra(ens.rng_seed, ens.step, ia), rb(ens.rng_seed, ens.step, ib);
    const AgentState& a = pre[ia];
    const AgentState& b = pre[ib];
    InteractionDraw da, db;
    da.tilde_A = bernoulli(ra, activity_weight(a.A, sp.gamma) * sp.omega_p + sp.eps_floor);
    da.eta = sample_bounded_noise(a.w, sp.sigma2_p, kernels, sp.lambda_p, ra);
    db.tilde_A = bernoulli(rb, activity_weight(b.A, sp.gamma) * sp.omega_p + sp.eps_floor);
    db.eta = sample_bounded_noise(b.w, sp.sigma2_p, kernels, sp.lambda_p, rb);
    auto [a2, b2] = agent_agent_update(a, b, sp, kernels, da, db);
    qv += std::pow(kernels.D(a.w) * da.eta, 2) + std::pow(kernels.D(b.w) * db.eta, 2);

    for (int side = 0; side < 2; ++side) {
      CounterRng& rng = side == 0 ? ra : rb;
      const AgentState& before = side == 0 ? a : b;
      AgentState cur = side == 0 ? a2 : b2;
      if (leaders) {
        InteractionDraw dl;
        const double z = leaders->sample(rng);
        dl.tilde_A = bernoulli(rng, activity_weight(before.A, sp.gamma) * sp.omega_l + sp.eps_floor);
        dl.eta = sample_bounded_noise(cur.w, sp.sigma2_l, kernels, sp.lambda_l, rng);
        qv += std::pow(kernels.D(cur.w) * dl.eta, 2);
        cur = agent_leader_update(cur, z, sp, kernels, dl);
      }
      if (controlled && bernoulli(rng, sp.theta)) cur.A = controlled_activity_update(before.A, sp.lambda_c);
      ens.agents[side == 0 ? ia : ib] = cur;
    }
  }
  ens.noise_qv += qv;
  ens.step += 1;
  ens.time = static_cast<double>(ens.step) * dt;
  return ens;
}

Grid1D bin_marginal(const Ensemble& ens, Axis axis, const Eigen::ArrayXd& edges) {
  const Eigen::Index nb = edges.size() - 1;
  if (nb < 1) throw ConfigError("bin_marginal: at least two edges required");
  const double d = (edges[nb] - edges[0]) / static_cast<double>(nb);
  if (!(d > 0.0)) throw ConfigError("bin_marginal: edges must increase");
  for (Eigen::Index i = 0; i <= nb; ++i)
    if (std::abs(edges[i] - (edges[0] + static_cast<double>(i) * d)) > 1e-9 * d)
      throw ConfigError("bin_marginal: edges must be uniform");
  if (ens.agents.empty()) throw ConfigError("bin_marginal: empty ensemble");
  double lo = edges[0], hi = edges[nb];
  if (axis == Axis::Opinion) {
    if (lo > -1.0 || hi < 1.0) throw ConfigError("bin_marginal: opinion edges must cover [-1,1]");
  } else {
    double amin = ens.agents.front().A, amax = amin;
    for (const AgentState& s : ens.agents) {
      amin = std::min(amin, s.A);
      amax = std::max(amax, s.A);
    }
    if (amin < lo) lo -= std::ceil((lo - amin) / d) * d;
    if (amax > hi) hi += std::ceil((amax - hi) / d) * d;
  }
  const Eigen::Index n = static_cast<Eigen::Index>(std::llround((hi - lo) / d));
  Grid1D g(axis, lo, hi, Eigen::ArrayXd::Zero(n));
  for (const AgentState& s : ens.agents) {
    const double x = axis == Axis::Opinion ? s.w : s.A;
    const Eigen::Index k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((x - lo) / d)), 0, n - 1);
    g.values[k] += 1.0;
  }
  g.values /= static_cast<double>(ens.agents.size()) * d;
  return g;
}

McRun run_mc(const McConfig& cfg) {
  cfg.params.validate();
  if (cfg.initial.agents.size() % 2 != 0 || cfg.initial.agents.empty())
    throw ConfigError("mc: number of agents must be even and positive");
  if (!(cfg.t_final >= 0.0)) throw ConfigError("mc: t_final must be nonnegative");
  if (cfg.record_every < 1) throw ConfigError("mc: record_every must be >= 1");
  for (const AgentState& s : cfg.initial.agents)
    if (!(s.w >= -1.0 && s.w <= 1.0)) throw ConfigError("mc: initial opinions must lie in [-1,1]");
  if (!cfg.snapshot_times.empty() && (cfg.w_edges.size() < 2 || cfg.a_edges.size() < 2))
    throw ConfigError("mc: snapshot bins are required when snapshots are requested");

  McRun run;
  run.steps = std::lround(cfg.t_final / cfg.params.qi_scale);
  Ensemble ens = cfg.initial;
  std::vector<double> pending = cfg.snapshot_times;
  std::sort(pending.begin(), pending.end());
  std::size_t next_snap = 0;
  auto record = [&](long step) {
    if (step % cfg.record_every == 0 || step == run.steps) {
      Macros m = compute_macros(ens, cfg.params);
      m.t = ens.time;
      run.series.push_back(m);
      if (cfg.on_record) cfg.on_record(ens);
    }
    while (next_snap < pending.size() && ens.time >= pending[next_snap] - 0.5 * cfg.params.qi_scale) {
      run.snapshots.push_back(
          {ens.time, bin_marginal(ens, Axis::Opinion, cfg.w_edges), bin_marginal(ens, Axis::Activity, cfg.a_edges)});
      ++next_snap;
    }
  };
  record(0);
  for (long s = 1; s <= run.steps; ++s) {
    ens = mc_step(std::move(ens), cfg.params, cfg.kernels, cfg.leaders, cfg.controlled, cfg.params.qi_scale);
    record(s);
  }
  run.final_state = std::move(ens);
  return run;
}

}  // namespace kinop
