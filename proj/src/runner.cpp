#include "kinop/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <limits>

#include <json.hpp>

#include "kinop/control.hpp"
#include "kinop/diagnostics.hpp"
#include "kinop/fp.hpp"

namespace kinop {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Step counter reserved for sampling the initial ensemble.
constexpr std::uint64_t kInitialStream = ~std::uint64_t{0} - 1;

bool has_opinion(Solver s) { return s == Solver::Mc || s == Solver::FpH || s == Solver::Fp2d; }
bool has_activity(Solver s) { return s != Solver::FpH; }

Eigen::ArrayXd uniform_edges(double lo, double hi, Eigen::Index n) {
  return Eigen::ArrayXd::LinSpaced(n + 1, lo, hi);
}

// Cell averages of the indicator of [a, b] divided by b - a.
Grid1D box_density(Axis axis, double lo, double hi, Eigen::Index n, double a, double b) {
  Grid1D g(axis, lo, hi, Eigen::ArrayXd::Zero(n));
  const double d = g.dx();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double c0 = lo + static_cast<double>(i) * d;
    const double overlap = std::max(0.0, std::min(b, c0 + d) - std::max(a, c0));
    g.values[i] = overlap / (d * (b - a));
  }
  return g;
}

Grid1D point_density(Axis axis, double lo, double hi, Eigen::Index n, double x) {
  Grid1D g(axis, lo, hi, Eigen::ArrayXd::Zero(n));
  const Eigen::Index k = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::floor((x - lo) / g.dx())), 0, n - 1);
  g.values[k] = 1.0 / g.dx();
  return g;
}

double interpolate_table(const InitialSpec& in, double w) {
  const auto& xs = in.table_w;
  if (w < xs.front() || w > xs.back()) return 0.0;
  const auto it = std::upper_bound(xs.begin(), xs.end(), w);
  if (it == xs.end()) return in.table_density.back();
  const std::size_t k = static_cast<std::size_t>(it - xs.begin());
  const double u = (w - xs[k - 1]) / (xs[k] - xs[k - 1]);
  return (1.0 - u) * in.table_density[k - 1] + u * in.table_density[k];
}

bool controlled(const Scenario& s) { return s.model == Model::Controlled; }

void require_effective_control(const Scenario& s) {
  if (!controlled(s)) return;
  const ControlFeasibility f = special_case_verdict(s.params, s.channels);
  if (f.verdict != ControlVerdict::Effective)
    throw InfeasibleControl("control is " + to_string(f.verdict) + ": " + f.explanation);
}

long record_stride(double output_every, double dt) {
  if (!(output_every > 0.0)) return 1;
  return std::max(1L, std::lround(output_every / dt));
}

// Equal steps reaching t_final with size at most `dt`.
long step_count(double t_final, double& dt) {
  if (!(t_final > 0.0)) return 0;
  if (!std::isfinite(dt) || dt > t_final) dt = t_final;
  const long n = static_cast<long>(std::ceil(t_final / dt - 1e-9));
  dt = t_final / static_cast<double>(n);
  return n;
}

class Recorder {
 public:
  Recorder(const Scenario& s, SimulationResult& out) : s_(s), out_(out) {
    if (has_opinion(s.solver)) {
      try {
        const double m0 = initial_opinion(s).mean();
        out_.reference = global_equilibrium_h(s.params, s.channels, m0);
        ref_cells_ = out_.reference->cell_averages(s.grid.w_cells);
      } catch (const DomainError&) {
        out_.reference.reset();
      }
    }
  }

  void record(const Macros& m, const Grid1D* h, double mass) {
    out_.series.push_back(m);
    out_.mass.push_back(mass);
    Functionals f{kNaN, kNaN, kNaN, kNaN};
    if (h && ref_cells_) {
      f.H = relative_entropy(*h, *ref_cells_);
      f.D = hellinger(*h, *ref_cells_);
      f.I_H = entropy_production(*h, *ref_cells_);
      f.L1 = l1_distance(*h, *ref_cells_);
    }
    out_.functionals.push_back(f);
  }

  // Takes the snapshots whose time has been reached within half a step.
  void snapshots(double t, double half_step, const std::function<Snapshot()>& make) {
    const auto& times = s_.run.snapshots;
    while (next_ < times.size() && t >= times[next_] - half_step) {
      Snapshot snap = make();
      snap.t = t;
      out_.snapshots.push_back(std::move(snap));
      ++next_;
    }
  }

  void final_snapshot(double t, double half_step, const std::function<Snapshot()>& make) {
    if (!out_.snapshots.empty() && std::abs(out_.snapshots.back().t - t) <= half_step) return;
    Snapshot snap = make();
    snap.t = t;
    out_.snapshots.push_back(std::move(snap));
  }

 private:
  const Scenario& s_;
  SimulationResult& out_;
  std::optional<Grid1D> ref_cells_;
  std::size_t next_ = 0;
};

void simulate_fp_h(const Scenario& s, SimulationResult& out) {
  const Grid1D h0 = initial_opinion(s);
  const double dt = h_time_step(h0, s.params, s.channels, s.run.t_final, s.run.dt);
  out.dt = dt;
  const long stride = record_stride(s.run.output_every, dt);
  Recorder rec(s, out);
  HOptions opt;
  opt.dt = dt;
  opt.record_every = 0;
  opt.observer = [&](long n, double t, double, const Grid1D& h) {
    const long total = s.run.t_final > 0.0 ? std::lround(s.run.t_final / dt) : 0;
    if (n % stride == 0 || n == total) rec.record(compute_macros_h(h, s.params, t), &h, h.mass());
    rec.snapshots(t, 0.5 * dt, [&] { return Snapshot{t, h, std::nullopt}; });
    if (n == total) rec.final_snapshot(t, 0.5 * dt, [&] { return Snapshot{t, h, std::nullopt}; });
  };
  const HTrajectory tr = advance_h(h0, s.params, s.channels, s.mean_mode, s.run.t_final, opt);
  out.steps = tr.steps;
}

void simulate_fp_g(const Scenario& s, SimulationResult& out) {
  const bool ctl = controlled(s);
  const ActivityVelocity V(s.params, s.channels, ctl);
  Grid1D g = initial_activity(s);
  double dt = s.run.dt > 0.0 ? s.run.dt : 0.25 * activity_cfl_dt(g, V);
  const long steps = step_count(s.run.t_final, dt);
  out.dt = dt;
  out.steps = steps;
  const long stride = record_stride(s.run.output_every, dt);
  Recorder rec(s, out);
  for (long n = 0;; ++n) {
    const double t = static_cast<double>(n) * dt;
    if (n % stride == 0 || n == steps) rec.record(compute_macros_g(g, s.params, t), nullptr, g.mass());
    rec.snapshots(t, 0.5 * dt, [&] { return Snapshot{t, std::nullopt, g}; });
    if (n == steps) {
      rec.final_snapshot(t, 0.5 * dt, [&] { return Snapshot{t, std::nullopt, g}; });
      break;
    }
    try {
      g = transport_step_g(g, V, dt);
    } catch (const SolverError& e) {
      throw e.at_step(n);
    }
  }
}

void simulate_characteristics(const Scenario& s, SimulationResult& out) {
  const ActivityVelocity V(s.params, s.channels, controlled(s));
  const Grid1D g0 = initial_activity(s);
  std::vector<double> times{0.0};
  if (s.run.output_every > 0.0)
    for (long k = 1; static_cast<double>(k) * s.run.output_every < s.run.t_final * (1.0 - 1e-12); ++k)
      times.push_back(static_cast<double>(k) * s.run.output_every);
  for (double t : s.run.snapshots) times.push_back(t);
  if (s.run.t_final > 0.0) times.push_back(s.run.t_final);
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  out.steps = static_cast<long>(times.size()) - 1;
  out.dt = s.run.output_every;
  Recorder rec(s, out);
  for (double t : times) {
    const Grid1D g = advance_g_exact(g0, V, t);
    rec.record(compute_macros_g(g, s.params, t), nullptr, g.mass());
    rec.snapshots(t, 0.0, [&] { return Snapshot{t, std::nullopt, g}; });
    if (t == times.back()) rec.final_snapshot(t, 0.0, [&] { return Snapshot{t, std::nullopt, g}; });
  }
}

void simulate_fp_2d(const Scenario& s, SimulationResult& out) {
  const bool ctl = controlled(s);
  const InteractionKernels kernels = s.kernels();
  Grid2D f = product_density(initial_activity(s), initial_opinion(s));
  double dt = s.run.dt;
  if (!(dt > 0.0)) {
    const FStepLimits lim = split_step_limits(f, s.params, kernels, s.channels, ctl);
    dt = 0.25 * std::min(lim.opinion_dt, lim.activity_dt);
  }
  const long steps = step_count(s.run.t_final, dt);
  out.dt = dt;
  out.steps = steps;
  const long stride = record_stride(s.run.output_every, dt);
  Recorder rec(s, out);
  for (long n = 0;; ++n) {
    const double t = static_cast<double>(n) * dt;
    auto snap = [&] { return Snapshot{t, f.opinion_marginal(), f.activity_marginal()}; };
    if (n % stride == 0 || n == steps) {
      const Grid1D h = f.opinion_marginal();
      rec.record(compute_macros(f, s.params, t), &h, f.mass());
    }
    rec.snapshots(t, 0.5 * dt, snap);
    if (n == steps) {
      rec.final_snapshot(t, 0.5 * dt, snap);
      break;
    }
    try {
      f = split_step_f(f, s.params, kernels, s.channels, ctl, dt);
    } catch (const SolverError& e) {
      throw e.at_step(n);
    }
  }
}

void simulate_mc(const Scenario& s, SimulationResult& out) {
  McConfig cfg;
  cfg.params = s.params;
  cfg.kernels = s.kernels();
  if (s.channels != Channels::Agents) {
    const double mu = s.params.mu_l;
    const double k = s.leaders.concentration;
    cfg.leaders = s.leaders.kind == LeaderSpec::Kind::Point ? LeaderDistribution::point(mu)
                                                           : LeaderDistribution::beta(k * (1.0 - mu), k * (1.0 + mu));
  }
  cfg.controlled = controlled(s);
  cfg.initial = initial_ensemble(s);
  cfg.t_final = s.run.t_final;
  cfg.record_every = record_stride(s.run.output_every, s.params.qi_scale);
  cfg.snapshot_times = s.run.snapshots;
  cfg.w_edges = uniform_edges(-1.0, 1.0, s.grid.w_cells);
  const Grid1D g0 = initial_activity(s);
  cfg.a_edges = uniform_edges(g0.lo, g0.hi, g0.size());

  Recorder rec(s, out);
  std::vector<Grid1D> hists;
  cfg.on_record = [&](const Ensemble& ens) { hists.push_back(bin_marginal(ens, Axis::Opinion, cfg.w_edges)); };
  McRun run = run_mc(cfg);
  for (std::size_t i = 0; i < run.series.size(); ++i) rec.record(run.series[i], &hists[i], 1.0);
  for (McSnapshot& snap : run.snapshots) out.snapshots.push_back({snap.t, std::move(snap.h), std::move(snap.g)});
  const Ensemble& fin = run.final_state;
  rec.final_snapshot(fin.time, 0.5 * s.params.qi_scale, [&] {
    return Snapshot{fin.time, bin_marginal(fin, Axis::Opinion, cfg.w_edges), bin_marginal(fin, Axis::Activity, cfg.a_edges)};
  });
  out.steps = run.steps;
  out.dt = s.params.qi_scale;
  out.agents_initial = static_cast<long>(cfg.initial.agents.size());
  out.agents_final = static_cast<long>(fin.agents.size());
}

// ---- output helpers ----

std::string fmt(double x) { return format_double(x); }

Json number(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

template <typename T>
Json optional_number(const std::optional<T>& x) {
  return x ? number(*x) : Json(nullptr);
}

Json exponents_json(const BetaExponents& b) { return Json{{"b1", b.b1}, {"b2", b.b2}}; }

Json regime_json(const RegimeReport& r) {
  return Json{{"regime_active", to_string(r.regime_active)},
              {"regime_inactive", to_string(r.regime_inactive)},
              {"mixed", r.mixed()},
              {"exponents_active", exponents_json(r.active)},
              {"exponents_inactive", exponents_json(r.inactive)},
              {"A_star_weight", optional_number(r.A_star)},
              {"A_star_level", optional_number(r.A_star_level)}};
}

Json regime_from_macros(const Macros& m, const ModelParams& p) {
  if (!std::isfinite(m.rho_bar) || !std::isfinite(m.m_bar) || !(std::abs(m.m_bar) < m.rho_bar)) return nullptr;
  return regime_json(classify_regime(m.rho_bar, m.m_bar, p));
}

Json interval_json(const std::optional<OpenInterval>& iv) {
  if (!iv) return nullptr;
  return Json::array({iv->lo, iv->hi});
}

Json feasibility_json(const ModelParams& p, Channels channels) {
  const ControlFeasibility f = special_case_verdict(p, channels);
  const ActivityChannel ch = activity_channel(p, channels);
  return Json{{"channel", Json{{"omega", ch.omega}, {"eps", ch.eps}, {"fade", ch.fade}}},
              {"C_i", f.C_i},
              {"C_a", f.C_a},
              {"lambda_c_interval", interval_json(f.lambda_c_interval)},
              {"theta_interval", interval_json(f.theta_interval)},
              {"A_c_star", optional_number(f.A_c_star)},
              {"A_p_star", optional_number(f.A_p_star)},
              {"verdict", to_string(f.verdict)},
              {"explanation", f.explanation}};
}

Json fit_json(const FitResult& r, std::optional<double> expected) {
  Json j{{"rate", r.rate}, {"intercept", r.intercept}, {"r2", r.r2}, {"slope_stderr", r.slope_stderr},
         {"points", r.points}};
  if (expected) {
    j["expected"] = *expected;
    j["relative_error"] = std::abs(r.rate - *expected) / std::abs(*expected);
  }
  return j;
}

// Fit of `value` over the samples where it is positive and finite.
Json try_fit(const std::vector<double>& t, const std::vector<double>& value, RateModel model,
             std::optional<double> expected) {
  std::vector<double> tt, vv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(value[i] > 1e-13) || !std::isfinite(value[i])) continue;
    if (model == RateModel::Power && !(t[i] > 0.0)) continue;
    tt.push_back(t[i]);
    vv.push_back(value[i]);
  }
  try {
    return fit_json(fit_rate(tt, vv, model), expected);
  } catch (const DomainError&) {
    return nullptr;
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

void write_grid_csv(const fs::path& path, const Grid1D& g, const char* x_name, const char* y_name) {
  std::string text = std::string(x_name) + "," + y_name + "\n";
  const Eigen::ArrayXd c = g.centers();
  for (Eigen::Index i = 0; i < g.size(); ++i) text += fmt(c[i]) + "," + fmt(g.values[i]) + "\n";
  write_text(path, text);
}

Json macros_json(const Macros& m) {
  return Json{{"t", number(m.t)},         {"rho_a", number(m.rho_a)},     {"rho_u", number(m.rho_u)},
              {"rho_i", number(m.rho_i)}, {"m_w", number(m.m_w)},         {"m_A", number(m.m_A)},
              {"rho_bar", number(m.rho_bar)}, {"m_bar", number(m.m_bar)}};
}

Json write_simulation(const Scenario& s, const SimulationResult& r, const fs::path& dir) {
  fs::create_directories(dir / "snapshots");
  write_text(dir / "config.ini", serialize_config(s));

  std::string macros = "t,rho_a,rho_u,rho_i,m_w,m_A,rho_bar,m_bar,H,D,I_H,L1\n";
  std::string diag = "t,mass,mass_residual,m_w_closed_form,m_w_error\n";
  const double mass0 = r.mass.empty() ? 1.0 : r.mass.front();
  const double m0 = r.series.empty() ? kNaN : r.series.front().m_w;
  double mass_residual = 0.0, mean_drift = 0.0;
  std::vector<double> t, mean_gap, l1, act_gap;
  const std::optional<double> a_c = fixed_points(s.params, s.channels).A_c_star;
  for (std::size_t i = 0; i < r.series.size(); ++i) {
    const Macros& m = r.series[i];
    const Functionals& f = r.functionals[i];
    macros += fmt(m.t) + "," + fmt(m.rho_a) + "," + fmt(m.rho_u) + "," + fmt(m.rho_i) + "," + fmt(m.m_w) + "," +
              fmt(m.m_A) + "," + fmt(m.rho_bar) + "," + fmt(m.m_bar) + "," + fmt(f.H) + "," + fmt(f.D) + "," +
              fmt(f.I_H) + "," + fmt(f.L1) + "\n";
    const double res = std::abs(r.mass[i] - mass0) / mass0;
    mass_residual = std::max(mass_residual, res);
    double closed = kNaN;
    if (std::isfinite(m0)) {
      closed = s.channels == Channels::Agents ? m0 : mean_opinion_closed_form(m.t, m0, s.params);
      mean_drift = std::max(mean_drift, std::abs(m.m_w - m0));
    }
    diag += fmt(m.t) + "," + fmt(r.mass[i]) + "," + fmt(res) + "," + fmt(closed) + "," + fmt(m.m_w - closed) + "\n";
    t.push_back(m.t);
    mean_gap.push_back(std::abs(m.m_w - s.params.mu_l));
    l1.push_back(f.L1);
    act_gap.push_back(a_c ? std::abs(m.m_A - *a_c) : kNaN);
  }
  write_text(dir / "macros.csv", macros);
  write_text(dir / "diagnostics.csv", diag);

  Json snaps = Json::array();
  for (std::size_t k = 0; k < r.snapshots.size(); ++k) {
    const Snapshot& sn = r.snapshots[k];
    char name[32];
    Json entry{{"t", sn.t}};
    if (sn.h) {
      std::snprintf(name, sizeof name, "h_%03zu.csv", k);
      write_grid_csv(dir / "snapshots" / name, *sn.h, "w", "h");
      entry["h"] = std::string("snapshots/") + name;
    }
    if (sn.g) {
      std::snprintf(name, sizeof name, "g_%03zu.csv", k);
      write_grid_csv(dir / "snapshots" / name, *sn.g, "A", "g");
      entry["g"] = std::string("snapshots/") + name;
    }
    snaps.push_back(entry);
  }

  Json fits{{"mean_relaxation", nullptr}, {"l1_power", nullptr}, {"activity_contraction", nullptr}};
  if (has_opinion(s.solver) && s.channels != Channels::Agents)
    fits["mean_relaxation"] = try_fit(t, mean_gap, RateModel::Exponential,
                                      s.solver == Solver::FpH ? std::optional<double>(beta_rate(s.params)) : std::nullopt);
  if (r.reference) fits["l1_power"] = try_fit(t, l1, RateModel::Power, std::nullopt);
  if (controlled(s) && has_activity(s.solver) && a_c)
    fits["activity_contraction"] =
        try_fit(t, act_gap, RateModel::Exponential, s.params.theta * s.params.lambda_c / 2.0);

  Json conservation{{"mass_relative", mass_residual}};
  if (std::isfinite(m0)) conservation["mean_opinion_drift"] = mean_drift;
  if (s.solver == Solver::Mc) {
    conservation["agents_initial"] = r.agents_initial;
    conservation["agents_final"] = r.agents_final;
  }

  Json summary{{"command", "simulate"},
               {"solver", to_string(s.solver)},
               {"model", to_string(s.model)},
               {"channels", to_string(s.channels)},
               {"seed", s.run.seed},
               {"steps", r.steps},
               {"dt", r.dt},
               {"regime",
                Json{{"initial", r.series.empty() ? Json(nullptr) : regime_from_macros(r.series.front(), s.params)},
                     {"final", r.series.empty() ? Json(nullptr) : regime_from_macros(r.series.back(), s.params)}}},
               {"feasibility", feasibility_json(s.params, s.channels)},
               {"equilibrium", r.reference ? exponents_json(r.reference->exponents()) : Json(nullptr)},
               {"fits", fits},
               {"conservation", conservation},
               {"final", r.series.empty() ? Json(nullptr) : macros_json(r.series.back())},
               {"snapshots", snaps}};
  write_json(dir / "summary.json", summary);
  return summary;
}

void write_beta_table(const fs::path& path, const BetaEquilibrium& b, long n) {
  const Grid1D cells = b.cell_averages(n);
  const Eigen::ArrayXd c = cells.centers();
  std::string text = "w,density,cell_average\n";
  for (Eigen::Index i = 0; i < cells.size(); ++i)
    text += fmt(c[i]) + "," + fmt(b.density(c[i])) + "," + fmt(cells.values[i]) + "\n";
  write_text(path, text);
}

Macros initial_macros(const Scenario& s) {
  return compute_macros(product_density(initial_activity(s), initial_opinion(s)), s.params, 0.0);
}

void run_classify(const Scenario& s, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize_config(s));
  double rho = 0.0, m = 0.0;
  std::string source = "config";
  if (s.classify.rho_bar) {
    rho = *s.classify.rho_bar;
    m = *s.classify.m_bar;
  } else {
    const Macros mac = initial_macros(s);
    rho = mac.rho_bar;
    m = mac.m_bar;
    source = "initial";
  }
  const RegimeReport rep = classify_regime(rho, m, s.params);
  Json tables = Json::object();
  const std::pair<const char*, double> slices[] = {{"inactive", 0.0}, {"active", 1.0}};
  for (const auto& [name, weight] : slices) {
    const BetaExponents b = partial_equilibrium(ActivityWeight{weight}, rho, m, s.params, s.channels);
    Json t{{"weight", weight}, {"exponents", exponents_json(b)}, {"file", nullptr}};
    if (b.b1 > 0.0 && b.b2 > 0.0) {
      const std::string file = std::string("partial_") + name + ".csv";
      write_beta_table(dir / file, BetaEquilibrium(b), s.grid.w_cells);
      t["file"] = file;
    }
    tables[name] = t;
  }
  Json summary{{"command", "classify"},
               {"moments", Json{{"source", source}, {"rho_bar", rho}, {"m_bar", m}}},
               {"regime", regime_json(rep)},
               {"partial_equilibria", tables},
               {"feasibility", feasibility_json(s.params, s.channels)}};
  write_json(dir / "summary.json", summary);
}

void run_feasibility(const Scenario& s, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize_config(s));
  write_json(dir / "summary.json",
             Json{{"command", "feasibility"},
                  {"balanced_lambda_c", balanced_lambda_c(s.params, s.channels)},
                  {"feasibility", feasibility_json(s.params, s.channels)}});
}

void run_equilibrium(const Scenario& s, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize_config(s));
  const double m_in = initial_opinion(s).mean();
  const BetaExponents g = global_exponents(s.params, s.channels, m_in);
  const BetaExponents l = local_exponents(m_in, s.params);
  const RegularityIndices reg = regularity_indices(s.params, m_in);
  Json global{{"exponents", exponents_json(g)}, {"normalizable", g.b1 > 0.0 && g.b2 > 0.0}, {"file", nullptr}};
  if (g.b1 > 0.0 && g.b2 > 0.0) {
    const BetaEquilibrium b(g);
    write_beta_table(dir / "equilibrium.csv", b, s.grid.w_cells);
    global["file"] = "equilibrium.csv";
    global["normalization"] = b.normalization();
    global["mean"] = b.mean();
  }
  Json local{{"m_w", m_in}, {"exponents", exponents_json(l)}, {"file", nullptr}};
  if (l.b1 > 0.0 && l.b2 > 0.0) {
    write_beta_table(dir / "local_equilibrium.csv", BetaEquilibrium(l), s.grid.w_cells);
    local["file"] = "local_equilibrium.csv";
  }
  Json tau = Json::array();
  for (int q = 2; q <= 4; ++q) tau.push_back(Json{{"q", q}, {"tau", reg.tau(q)}, {"feasible", reg.feasible(q)}});
  Json summary{{"command", "equilibrium"},
               {"channels", to_string(s.channels)},
               {"m_in", m_in},
               {"global", global},
               {"local", local},
               {"regularity",
                Json{{"q_star", optional_number(reg.q_star)},
                     {"infinity_regular", reg.infinity_regular},
                     {"q_bar", optional_number(reg.q_bar)},
                     {"tau_coefficient", reg.tau_coefficient},
                     {"beta", reg.beta},
                     {"tau", tau}}}};
  write_json(dir / "summary.json", summary);
}

void run_compare(const Scenario& s, const fs::path& dir) {
  fs::create_directories(dir);
  write_text(dir / "config.ini", serialize_config(s));
  Scenario legs[2] = {s, s};
  legs[0].solver = s.compare.first;
  legs[1].solver = s.compare.second;
  for (const Scenario& leg : legs) validate(leg);
  auto a = std::async(std::launch::async, [&] { return simulate(legs[0]); });
  auto b = std::async(std::launch::async, [&] { return simulate(legs[1]); });
  const SimulationResult ra = a.get();
  const SimulationResult rb = b.get();
  write_simulation(legs[0], ra, dir / to_string(legs[0].solver));
  write_simulation(legs[1], rb, dir / to_string(legs[1].solver));

  const std::size_t n = std::min(ra.snapshots.size(), rb.snapshots.size());
  std::string csv = "t,L1_opinion,L1_activity\n";
  Json rows = Json::array();
  double worst_h = 0.0, worst_g = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const Snapshot& x = ra.snapshots[k];
    const Snapshot& y = rb.snapshots[k];
    double lh = kNaN, lg = kNaN;
    if (x.h && y.h) {
      lh = binned_l1(*x.h, *y.h, s.compare.bins);
      worst_h = std::max(worst_h, lh);
    }
    if (x.g && y.g) {
      lg = aligned_l1(*x.g, *y.g);
      worst_g = std::max(worst_g, lg);
    }
    csv += fmt(y.t) + "," + fmt(lh) + "," + fmt(lg) + "\n";
    rows.push_back(Json{{"t", y.t}, {"L1_opinion", number(lh)}, {"L1_activity", number(lg)}});
  }
  write_text(dir / "compare.csv", csv);
  write_json(dir / "summary.json", Json{{"command", "compare"},
                                        {"first", to_string(legs[0].solver)},
                                        {"second", to_string(legs[1].solver)},
                                        {"bins", s.compare.bins},
                                        {"comparisons", rows},
                                        {"max_L1_opinion", has_opinion(legs[0].solver) && has_opinion(legs[1].solver)
                                                               ? Json(worst_h)
                                                               : Json(nullptr)},
                                        {"max_L1_activity", has_activity(legs[0].solver) && has_activity(legs[1].solver)
                                                                ? Json(worst_g)
                                                                : Json(nullptr)}});
}

}  // namespace

std::optional<Command> parse_command(const std::string& name) {
  if (name == "simulate") return Command::Simulate;
  if (name == "classify") return Command::Classify;
  if (name == "feasibility") return Command::Feasibility;
  if (name == "equilibrium") return Command::Equilibrium;
  if (name == "compare") return Command::Compare;
  return std::nullopt;
}

Grid1D initial_opinion(const Scenario& s) {
  const InitialSpec& in = s.initial;
  const Eigen::Index n = s.grid.w_cells;
  switch (in.kind) {
    case InitialSpec::Kind::Uniform: return box_density(Axis::Opinion, -1.0, 1.0, n, in.w_min, in.w_max);
    case InitialSpec::Kind::Beta: return BetaEquilibrium(in.b1, in.b2).cell_averages(n);
    case InitialSpec::Kind::Point: return point_density(Axis::Opinion, -1.0, 1.0, n, in.w0);
    case InitialSpec::Kind::Table:
      return normalized(project_density(Axis::Opinion, -1.0, 1.0, n, [&](double w) { return interpolate_table(in, w); }));
  }
  return Grid1D::opinion(n);
}

Grid1D initial_activity(const Scenario& s) {
  const ActivityAxis ax = make_activity_axis(s.grid.a_min, s.grid.a_max, s.params.gamma, s.grid.a_cells_per_gamma);
  const InitialSpec& in = s.initial;
  if (in.kind == InitialSpec::Kind::Point) return point_density(Axis::Activity, ax.lo, ax.hi, ax.n, in.a0);
  return box_density(Axis::Activity, ax.lo, ax.hi, ax.n, in.a_min, in.a_max);
}

Ensemble initial_ensemble(const Scenario& s) {
  const InitialSpec& in = s.initial;
  Ensemble ens;
  ens.rng_seed = s.run.seed;
  ens.agents.resize(static_cast<std::size_t>(s.run.agents));
  std::optional<LeaderDistribution> beta;
  if (in.kind == InitialSpec::Kind::Beta) beta = LeaderDistribution::beta(in.b1, in.b2);
  Eigen::ArrayXd cum;
  Grid1D table;
  if (in.kind == InitialSpec::Kind::Table) {
    table = initial_opinion(s);
    cum.resize(table.size() + 1);
    cum[0] = 0.0;
    for (Eigen::Index i = 0; i < table.size(); ++i) cum[i + 1] = cum[i] + table.values[i] * table.dx();
  }
  for (std::size_t i = 0; i < ens.agents.size(); ++i) {
    CounterRng rng(s.run.seed, kInitialStream, i);
    AgentState& a = ens.agents[i];
    switch (in.kind) {
      case InitialSpec::Kind::Uniform: a.w = in.w_min + (in.w_max - in.w_min) * rng.uniform(); break;
      case InitialSpec::Kind::Beta: a.w = beta->sample(rng); break;
      case InitialSpec::Kind::Point: a.w = in.w0; break;
      case InitialSpec::Kind::Table: {
        const double u = rng.uniform() * cum[cum.size() - 1];
        const auto* it = std::upper_bound(cum.data(), cum.data() + cum.size(), u);
        const Eigen::Index k = std::clamp<Eigen::Index>(it - cum.data() - 1, 0, table.size() - 1);
        a.w = table.lo + (static_cast<double>(k) + rng.uniform()) * table.dx();
        break;
      }
    }
    a.A = in.kind == InitialSpec::Kind::Point ? in.a0 : in.a_min + (in.a_max - in.a_min) * rng.uniform();
  }
  return ens;
}

SimulationResult simulate(const Scenario& s) {
  validate(s);
  require_effective_control(s);
  SimulationResult out;
  switch (s.solver) {
    case Solver::Mc: simulate_mc(s, out); break;
    case Solver::FpH: simulate_fp_h(s, out); break;
    case Solver::FpG: simulate_fp_g(s, out); break;
    case Solver::Fp2d: simulate_fp_2d(s, out); break;
    case Solver::Characteristics: simulate_characteristics(s, out); break;
  }
  return out;
}

double binned_l1(const Grid1D& a, const Grid1D& b, long bins) {
  if (!a.same_cells(b)) throw DomainError("binned_l1: grids differ");
  if (bins < 1 || a.size() % bins != 0) throw DomainError("binned_l1: bins must divide the cell count");
  const Eigen::Index group = a.size() / bins;
  const Eigen::ArrayXd d = a.values - b.values;
  double acc = 0.0;
  for (Eigen::Index k = 0; k < bins; ++k) acc += std::abs(d.segment(k * group, group).sum());
  return acc * a.dx();
}

double aligned_l1(const Grid1D& a, const Grid1D& b) {
  const double d = a.dx();
  if (std::abs(b.dx() - d) > 1e-9 * d) throw DomainError("aligned_l1: cell widths differ");
  const double shift = (b.lo - a.lo) / d;
  if (std::abs(shift - std::round(shift)) > 1e-6) throw DomainError("aligned_l1: edges are not aligned");
  const double lo = std::min(a.lo, b.lo);
  const Eigen::Index oa = std::lround((a.lo - lo) / d), ob = std::lround((b.lo - lo) / d);
  const Eigen::Index n = std::max(oa + a.size(), ob + b.size());
  Eigen::ArrayXd x = Eigen::ArrayXd::Zero(n), y = Eigen::ArrayXd::Zero(n);
  x.segment(oa, a.size()) = a.values;
  y.segment(ob, b.size()) = b.values;
  return (x - y).abs().sum() * d;
}

void run_command(Command command, const Scenario& s, const std::string& out_dir) {
  const fs::path dir(out_dir);
  try {
    switch (command) {
      case Command::Simulate: write_simulation(s, simulate(s), dir); break;
      case Command::Classify: run_classify(s, dir); break;
      case Command::Feasibility: run_feasibility(s, dir); break;
      case Command::Equilibrium: run_equilibrium(s, dir); break;
      case Command::Compare: run_compare(s, dir); break;
    }
  } catch (const SolverError& e) {
    fs::create_directories(dir);
    write_json(dir / "summary.json", Json{{"command", "error"},
                                          {"error", e.what()},
                                          {"failed_step", e.step() ? Json(*e.step()) : Json(nullptr)}});
    throw;
  }
}

}  // namespace kinop
