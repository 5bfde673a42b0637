#include "kinop/fp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kinop/control.hpp"
#include "kinop/equilibria.hpp"

namespace kinop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// x / (e^x - 1), the exponential-fitting weight.
double bernoulli_fn(double x) {
  if (std::abs(x) < 1e-8) return 1.0 - 0.5 * x;
  return x / std::expm1(x);
}

// Antiderivative of C/Dif for B = kappa (w - c), C = B + Dif', Dif = (sigma2/2)(1-w^2), k = 2 kappa / sigma2.
double affine_potential(double x, double k, double c) {
  return -0.5 * (k - 2.0) * std::log1p(-x * x) - 0.5 * k * c * (std::log1p(x) - std::log1p(-x));
}

// Interface flux F_{j+1/2} = lo[j] h_j + up[j] h_{j+1}, lo <= 0 <= up.
struct InterfaceCoefficients {
  Eigen::ArrayXd lo;
  Eigen::ArrayXd up;
};

void require_opinion_grid(const Grid1D& h) {
  if (h.axis != Axis::Opinion || std::abs(h.lo + 1.0) > 1e-12 || std::abs(h.hi - 1.0) > 1e-12)
    throw SolverError("opinion solver requires a grid on [-1,1]");
  if (h.size() < 2) throw SolverError("opinion solver requires at least two cells");
}

InterfaceCoefficients interface_coefficients(const Grid1D& h, const OpinionDrift& d) {
  if (!(d.sigma2 > 0.0)) throw SolverError("opinion diffusion sigma2 must be positive");
  const Eigen::Index n = h.size();
  const double dw = h.dx();
  const Eigen::ArrayXd w = h.centers();
  const bool has_table = d.nonlocal.size() > 0;
  if (has_table && d.nonlocal.size() != 2 * n - 1) throw SolverError("nonlocal drift table has the wrong size");
  const double k = 2.0 * d.kappa / d.sigma2;
  InterfaceCoefficients ic{Eigen::ArrayXd(n - 1), Eigen::ArrayXd(n - 1)};
  auto dif = [&](double x) { return 0.5 * d.sigma2 * (1.0 - x * x); };
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double wa = w[j], wb = w[j + 1];
    const double wm = -1.0 + static_cast<double>(j + 1) * dw;
    double lam = affine_potential(wb, k, d.center) - affine_potential(wa, k, d.center);
    if (has_table) {
      lam += dw / 6.0 *
             (d.nonlocal[2 * j] / dif(wa) + 4.0 * d.nonlocal[2 * j + 1] / dif(wm) + d.nonlocal[2 * j + 2] / dif(wb));
    }
    const double s = dif(wm) / dw;
    ic.lo[j] = -s * bernoulli_fn(lam);
    ic.up[j] = s * bernoulli_fn(-lam);
  }
  return ic;
}

// Solves the tridiagonal system with sub/diag/super diagonals; diagonally dominant M-matrix assumed.
Eigen::ArrayXd thomas(const Eigen::ArrayXd& sub, const Eigen::ArrayXd& diag, const Eigen::ArrayXd& sup,
                      const Eigen::ArrayXd& rhs) {
  const Eigen::Index n = diag.size();
  Eigen::ArrayXd c(n), x(n);
  double denom = diag[0];
  c[0] = sup[0] / denom;
  x[0] = rhs[0] / denom;
  for (Eigen::Index i = 1; i < n; ++i) {
    denom = diag[i] - sub[i] * c[i - 1];
    c[i] = i + 1 < n ? sup[i] / denom : 0.0;
    x[i] = (rhs[i] - sub[i] * x[i - 1]) / denom;
  }
  for (Eigen::Index i = n - 2; i >= 0; --i) x[i] -= c[i] * x[i + 1];
  return x;
}

void require_nonnegative(const Eigen::ArrayXd& v, const char* what) {
  if (v.size() == 0) return;
  const double tol = 1e-13 * std::max(1.0, v.abs().maxCoeff());
  if (v.minCoeff() < -tol) throw SolverError(std::string(what) + ": negative density on input");
}

double max_abs_interface_drift(const Grid1D& h, const OpinionDrift& d) {
  const Eigen::Index n = h.size();
  double m = 0.0;
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const double wm = -1.0 + static_cast<double>(j + 1) * h.dx();
    double b = d.kappa * (wm - d.center);
    if (d.nonlocal.size() > 0) b += d.nonlocal[2 * j + 1];
    m = std::max(m, std::abs(b));
  }
  return m;
}

}  // namespace

double drift_cfl_dt(const Grid1D& h, const OpinionDrift& drift) {
  const double m = max_abs_interface_drift(h, drift);
  return m > 0.0 ? h.dx() / m : kInf;
}

Grid1D cc_step_h(const Grid1D& h, const OpinionDrift& drift, double dt) {
  require_opinion_grid(h);
  require_nonnegative(h.values, "cc_step_h");
  if (!(dt > 0.0)) throw SolverError("cc_step_h: dt must be positive");
  if (dt > drift_cfl_dt(h, drift) * (1.0 + 1e-12)) throw SolverError("cc_step_h: dt exceeds the drift CFL bound");
  const Eigen::Index n = h.size();
  const InterfaceCoefficients ic = interface_coefficients(h, drift);
  const double r = dt / h.dx();
  // Row j of (I - dt L): dh_j/dt = (F_{j+1/2} - F_{j-1/2}) / dw with zero flux at +-1.
  Eigen::ArrayXd sub = Eigen::ArrayXd::Zero(n), diag = Eigen::ArrayXd::Ones(n), sup = Eigen::ArrayXd::Zero(n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    diag[j] -= r * ic.lo[j];
    sup[j] = -r * ic.up[j];
    diag[j + 1] += r * ic.up[j];
    sub[j + 1] = r * ic.lo[j];
  }
  Grid1D out = h;
  out.values = thomas(sub, diag, sup, h.values);
  return out;
}

double agent_flux_sum(const Grid1D& h, double alpha, double sigma2, double c) {
  OpinionDrift d{sigma2, alpha, c, {}};
  const InterfaceCoefficients ic = interface_coefficients(h, d);
  const Eigen::Index n = h.size();
  return (ic.lo * h.values.head(n - 1) + ic.up * h.values.tail(n - 1)).sum();
}

double self_consistent_center(const Grid1D& h, double alpha, double sigma2) {
  double c0 = h.mean();
  double f0 = agent_flux_sum(h, alpha, sigma2, c0);
  double c1 = c0 + 1e-6;
  double f1 = agent_flux_sum(h, alpha, sigma2, c1);
  for (int it = 0; it < 8; ++it) {
    if (f1 == f0) break;
    const double c2 = std::clamp(c1 - f1 * (c1 - c0) / (f1 - f0), -1.0 + 1e-12, 1.0 - 1e-12);
    c0 = c1;
    f0 = f1;
    c1 = c2;
    if (std::abs(c1 - c0) < 1e-15) break;
    f1 = agent_flux_sum(h, alpha, sigma2, c1);
  }
  return c1;
}

double h_time_step(const Grid1D& h0, const ModelParams& p, Channels mode, double t_final, double requested) {
  const double kappa = (mode != Channels::Leaders ? alpha_rate(p) : 0.0) + (mode != Channels::Agents ? beta_rate(p) : 0.0);
  // |B| <= 2 kappa on [-1,1] for any center in [-1,1].
  double dt = requested > 0.0 ? requested : 0.25 * h0.dx() / (2.0 * kappa);
  if (t_final > 0.0) {
    const double steps = std::ceil(t_final / dt - 1e-9);
    dt = t_final / steps;
  }
  return dt;
}

HTrajectory advance_h(const Grid1D& h0, const ModelParams& p, Channels mode, MeanMode mean_mode, double t_final,
                      const HOptions& options) {
  require_opinion_grid(h0);
  if (!(t_final >= 0.0)) throw SolverError("advance_h: t_final must be nonnegative");
  const double alpha = alpha_rate(p), beta = beta_rate(p);
  const double m0 = h0.mean();
  const bool agents = mode != Channels::Leaders;
  const bool leaders = mode != Channels::Agents;
  const double sigma2 = (agents ? p.sigma2_p : 0.0) + (leaders ? p.sigma2_l : 0.0);
  const double kappa = (agents ? alpha : 0.0) + (leaders ? beta : 0.0);

  auto drift_for = [&](double center) {
    const double c = ((agents ? alpha * center : 0.0) + (leaders ? beta * p.mu_l : 0.0)) / kappa;
    return OpinionDrift{sigma2, kappa, c, {}};
  };
  // SelfConsistent: the agent center is the root of m(step(h, c)) = target, where
  // target is the backward-Euler update of dm/dt = -beta (m - mu_l) (m itself
  // without leaders), so the discrete mean obeys that recursion exactly.
  auto step = [&](const Grid1D& h, double t_next, double dt, double& center) {
    if (!agents || mean_mode == MeanMode::ClosedForm) {
      center = agents && leaders ? p.mu_l + (m0 - p.mu_l) * std::exp(-beta * t_next) : m0;
      return cc_step_h(h, drift_for(center), dt);
    }
    const double m = h.mean();
    const double target = leaders ? (m + dt * beta * p.mu_l) / (1.0 + dt * beta) : m;
    double c0 = self_consistent_center(h, alpha, p.sigma2_p);
    Grid1D h0 = cc_step_h(h, drift_for(c0), dt);
    double r0 = h0.mean() - target;
    double c1 = std::clamp(c0 + (r0 > 0.0 ? -1e-6 : 1e-6), -1.0 + 1e-12, 1.0 - 1e-12);
    for (int it = 0; it < 10 && r0 != 0.0; ++it) {
      Grid1D h1 = cc_step_h(h, drift_for(c1), dt);
      double r1 = h1.mean() - target;
      if (std::abs(r1) < std::abs(r0)) {
        std::swap(c0, c1);
        std::swap(r0, r1);
        std::swap(h0, h1);
      }
      if (r1 == r0 || std::abs(r0) <= 1e-17) break;
      c1 = std::clamp(c0 - r0 * (c1 - c0) / (r1 - r0), -1.0 + 1e-12, 1.0 - 1e-12);
      if (c1 == c0) break;
    }
    center = c0;
    return h0;
  };

  HTrajectory tr;
  const double dt = h_time_step(h0, p, mode, t_final, options.dt);
  const long steps = t_final > 0.0 ? std::lround(t_final / dt) : 0;
  tr.dt = dt;
  tr.steps = steps;
  tr.t.push_back(0.0);
  tr.center.push_back(m0);
  tr.h.push_back(h0);

  if (options.observer) options.observer(0, 0.0, m0, h0);
  Grid1D h = h0;
  for (long n = 0; n < steps; ++n) {
    const double t_next = static_cast<double>(n + 1) * dt;
    double center = 0.0;
    try {
      h = step(h, t_next, dt, center);
    } catch (const SolverError& e) {
      throw e.at_step(n);
    }
    if (options.observer) options.observer(n + 1, t_next, center, h);
    const bool last = n + 1 == steps;
    if (last || (options.record_every > 0 && (n + 1) % options.record_every == 0)) {
      tr.t.push_back(t_next);
      tr.center.push_back(center);
      tr.h.push_back(h);
    }
  }
  return tr;
}

ActivityVelocity::ActivityVelocity(const ModelParams& p, Channels channels, bool controlled) : gamma_(p.gamma) {
  const ActivityChannel ch = activity_channel(p, channels);
  const double L = (controlled ? 1.0 - p.theta : 1.0) * p.lambda_A;
  slope_[0] = 0.0;
  offset_[0] = L * (ch.eps - ch.fade);
  slope_[1] = L * ch.omega / (2.0 * p.gamma);
  offset_[1] = L * (ch.omega / 2.0 + ch.eps - ch.fade);
  slope_[2] = 0.0;
  offset_[2] = L * (ch.omega + ch.eps - ch.fade);
  if (controlled)
    for (double& s : slope_) s -= p.theta * p.lambda_c / 2.0;
}

double ActivityVelocity::operator()(double A) const {
  const int k = A <= -gamma_ ? 0 : (A >= gamma_ ? 2 : 1);
  return slope_[k] * A + offset_[k];
}

int ActivityVelocity::piece_of(double A, double v) const {
  if (A < -gamma_) return 0;
  if (A > gamma_) return 2;
  if (A == -gamma_) return v > 0.0 ? 1 : 0;
  if (A == gamma_) return v > 0.0 ? 2 : 1;
  return 1;
}

double ActivityVelocity::flow(double A0, double t) const {
  const double s = t < 0.0 ? -1.0 : 1.0;
  double remaining = std::abs(t);
  double A = A0;
  // V is continuous, so a trajectory crosses each kink at most once.
  for (int crossing = 0; crossing < 4 && remaining > 0.0; ++crossing) {
    const double v = s * (*this)(A);
    if (v == 0.0) return A;
    const int k = piece_of(A, v);
    const double p = s * slope_[k], q = s * offset_[k];
    bool has_boundary = true;
    double b = 0.0;
    if (k == 0) {
      has_boundary = v > 0.0;
      b = -gamma_;
    } else if (k == 2) {
      has_boundary = v < 0.0;
      b = gamma_;
    } else {
      b = v > 0.0 ? gamma_ : -gamma_;
    }
    double tau = kInf;
    if (has_boundary) {
      if (p == 0.0) {
        tau = (b - A) / q;
      } else {
        const double a_fix = -q / p;
        const double ratio = (b - a_fix) / (A - a_fix);
        if (ratio > 0.0) {
          const double candidate = std::log(ratio) / p;
          if (candidate >= 0.0) tau = candidate;
        }
      }
    }
    if (tau >= remaining) {
      if (p == 0.0) return A + q * remaining;
      return A + (A + q / p) * std::expm1(p * remaining);
    }
    A = b;
    remaining -= tau;
  }
  return A;
}

double characteristics_g(double A0, const ModelParams& params, double t) {
  const auto interval = admissible_lambda_c(params);
  if (!interval || !interval->contains(params.lambda_c))
    throw InfeasibleControl("characteristics_g: lambda_c outside the admissible control interval");
  return ActivityVelocity(params, Channels::Agents, true).flow(A0, t);
}

namespace {

// Largest |v_i| over cells whose mass is positive; empty cells take no part in
// the upwind positivity condition.
double occupied_vmax(const Eigen::ArrayXd& cell_mass, const Eigen::ArrayXd& v) {
  return (cell_mass > 0.0).select(v.abs(), 0.0).maxCoeff();
}

}  // namespace

double activity_cfl_dt(const Grid1D& g, const ActivityVelocity& V) {
  const double m = occupied_vmax(g.values, V(g.centers()));
  return m > 0.0 ? g.dx() / m : kInf;
}

namespace {

// Cells appended on each side when mass reaches an outflow boundary.
Eigen::Index regrow_cells(Eigen::Index n) { return std::max<Eigen::Index>(8, n / 4); }

bool needs_regrow(double first_mass, double last_mass, double v_first, double v_last) {
  return (first_mass > 0.0 && v_first < 0.0) || (last_mass > 0.0 && v_last > 0.0);
}

// Upwind update of the rows of `values` (one row per activity cell) with nonnegative weights.
Eigen::ArrayXXd upwind_rows(const Eigen::ArrayXXd& values, const Eigen::ArrayXd& v, double r) {
  const Eigen::Index n = values.rows();
  const Eigen::ArrayXd vp = v.max(0.0), vm = (-v).max(0.0);
  Eigen::ArrayXXd out(values.rows(), values.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    out.row(i) = values.row(i) * (1.0 - r * std::abs(v[i]));
    if (i > 0) out.row(i) += r * vp[i - 1] * values.row(i - 1);
    if (i + 1 < n) out.row(i) += r * vm[i + 1] * values.row(i + 1);
  }
  return out;
}

}  // namespace

Grid1D transport_step_g(const Grid1D& g_in, const ActivityVelocity& V, double dt) {
  if (g_in.axis != Axis::Activity) throw SolverError("transport_step_g: activity grid required");
  if (!(dt > 0.0)) throw SolverError("transport_step_g: dt must be positive");
  Grid1D g = g_in;
  const Eigen::Index n0 = g.size();
  if (needs_regrow(g.values[0], g.values[n0 - 1], V(g.lo + 0.5 * g.dx()), V(g.hi - 0.5 * g.dx()))) {
    const Eigen::Index extra = regrow_cells(n0);
    const double d = g.dx();
    Eigen::ArrayXd v = Eigen::ArrayXd::Zero(n0 + 2 * extra);
    v.segment(extra, n0) = g.values;
    g = Grid1D(Axis::Activity, g.lo - extra * d, g.hi + extra * d, v);
  }
  const Eigen::ArrayXd vc = V(g.centers());
  const double r = dt / g.dx();
  if (r * occupied_vmax(g.values, vc) > 1.0 + 1e-12) throw SolverError("transport_step_g: CFL condition violated");
  g.values = upwind_rows(Eigen::ArrayXXd(g.values), vc, r).col(0);
  return g;
}

Grid1D transport_step_g(const Grid1D& g, const ModelParams& params, bool controlled, double dt, Channels channels) {
  return transport_step_g(g, ActivityVelocity(params, channels, controlled), dt);
}

Grid1D advance_g_exact(const Grid1D& g0, const ActivityVelocity& V, double t) {
  if (g0.axis != Axis::Activity) throw SolverError("advance_g_exact: activity grid required");
  const double d = g0.dx();
  const Eigen::Index n0 = g0.size();
  Eigen::ArrayXd cum(n0 + 1);
  cum[0] = 0.0;
  for (Eigen::Index i = 0; i < n0; ++i) cum[i + 1] = cum[i] + g0.values[i] * d;
  auto cdf0 = [&](double x) {
    if (x <= g0.lo) return 0.0;
    if (x >= g0.hi) return cum[n0];
    const double u = (x - g0.lo) / d;
    const Eigen::Index k = std::min<Eigen::Index>(static_cast<Eigen::Index>(u), n0 - 1);
    return cum[k] + g0.values[k] * (x - (g0.lo + static_cast<double>(k) * d));
  };
  const double img_lo = std::min(g0.lo, V.flow(g0.lo, t));
  const double img_hi = std::max(g0.hi, V.flow(g0.hi, t));
  const double k_lo = std::floor((img_lo - g0.lo) / d + 1e-9);
  const double k_hi = std::ceil((img_hi - g0.lo) / d - 1e-9);
  const Eigen::Index n = static_cast<Eigen::Index>(k_hi - k_lo);
  Grid1D out(Axis::Activity, g0.lo + k_lo * d, g0.lo + k_hi * d, Eigen::ArrayXd::Zero(n));
  double prev = cdf0(V.flow(out.lo, -t));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double edge = out.lo + static_cast<double>(i + 1) * d;
    const double next = cdf0(V.flow(edge, -t));
    out.values[i] = std::max(0.0, next - prev) / d;
    prev = next;
  }
  return out;
}

namespace {

struct WeightedMoments {
  double rho_bar;
  double m_bar;
};

// Weighted w-marginal H_j = sum_i (weight_i omega_p + eps) f_ij dA.
Eigen::ArrayXd weighted_opinion_marginal(const Grid2D& f, const ModelParams& p) {
  const Eigen::ArrayXd q = activity_weight(f.a_centers(), p.gamma) * p.omega_p + p.eps_floor;
  return (f.values.colwise() * q).colwise().sum().transpose() * f.dA();
}

WeightedMoments weighted_moments(const Grid2D& f, const ModelParams& p) {
  const Eigen::ArrayXd H = weighted_opinion_marginal(f, p);
  return {H.sum() * f.dw(), (H * f.w_centers()).sum() * f.dw()};
}

// K on the half grid for a general influence kernel.
Eigen::ArrayXd nonlocal_table(const Grid2D& f, const InteractionKernels& k, const ModelParams& p) {
  const Eigen::ArrayXd H = weighted_opinion_marginal(f, p) * f.dw();
  const Eigen::ArrayXd v = f.w_centers();
  const Eigen::Index n = f.cols();
  Eigen::ArrayXd table(2 * n - 1);
  for (Eigen::Index s = 0; s < 2 * n - 1; ++s) {
    const double x = -1.0 + 0.5 * static_cast<double>(s + 1) * f.dw();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) acc += H[j] * k.G(x, v[j]) * (x - v[j]);
    table[s] = acc;
  }
  return table;
}

std::vector<OpinionDrift> row_drifts(const Grid2D& f, const ModelParams& p, const InteractionKernels& k,
                                     Channels channels) {
  const bool agents = channels != Channels::Leaders;
  const bool leaders = channels != Channels::Agents;
  const double sigma2 = (agents ? p.sigma2_p : 0.0) + (leaders ? p.sigma2_l : 0.0);
  const Eigen::ArrayXd abar = activity_weight(f.a_centers(), p.gamma);
  std::vector<OpinionDrift> out(static_cast<size_t>(f.rows()));
  if (k.unit_influence()) {
    const WeightedMoments wm = weighted_moments(f, p);
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      const double ka = agents ? p.lambda_p * (abar[i] * p.omega_p + p.eps_floor) * wm.rho_bar : 0.0;
      const double kl = leaders ? p.lambda_l * (abar[i] * p.omega_l + p.eps_floor) : 0.0;
      const double ca = wm.rho_bar > 0.0 ? wm.m_bar / wm.rho_bar : 0.0;
      const double kappa = ka + kl;
      out[static_cast<size_t>(i)] = OpinionDrift{sigma2, kappa, kappa > 0.0 ? (ka * ca + kl * p.mu_l) / kappa : 0.0, {}};
    }
    return out;
  }
  const Eigen::Index n = f.cols();
  const Eigen::ArrayXd K = agents ? nonlocal_table(f, k, p) : Eigen::ArrayXd::Zero(2 * n - 1);
  Eigen::ArrayXd J(2 * n - 1);
  for (Eigen::Index s = 0; s < 2 * n - 1; ++s) {
    const double x = -1.0 + 0.5 * static_cast<double>(s + 1) * f.dw();
    J[s] = leaders ? k.G(x, p.mu_l) * (x - p.mu_l) : 0.0;
  }
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    const double sa = agents ? p.lambda_p * (abar[i] * p.omega_p + p.eps_floor) : 0.0;
    const double sl = leaders ? p.lambda_l * (abar[i] * p.omega_l + p.eps_floor) : 0.0;
    out[static_cast<size_t>(i)] = OpinionDrift{sigma2, 0.0, 0.0, sa * K + sl * J};
  }
  return out;
}

Grid2D opinion_substep(const Grid2D& f, const ModelParams& p, const InteractionKernels& k, Channels channels,
                       double dt) {
  const std::vector<OpinionDrift> drifts = row_drifts(f, p, k, channels);
  Grid2D out = f;
  Grid1D row = Grid1D::opinion(f.cols());
  for (Eigen::Index i = 0; i < f.rows(); ++i) {
    if ((f.values.row(i) == 0.0).all()) continue;
    row.values = f.values.row(i).transpose();
    out.values.row(i) = cc_step_h(row, drifts[static_cast<size_t>(i)], dt).values.transpose();
  }
  return out;
}

Grid2D activity_substep(const Grid2D& f_in, const ActivityVelocity& V, double dt) {
  Grid2D f = f_in;
  const Eigen::Index n0 = f.rows();
  const double d = f.dA();
  if (needs_regrow(f.values.row(0).sum(), f.values.row(n0 - 1).sum(), V(f.a_lo + 0.5 * d), V(f.a_hi - 0.5 * d))) {
    const Eigen::Index extra = regrow_cells(n0);
    Eigen::ArrayXXd v = Eigen::ArrayXXd::Zero(n0 + 2 * extra, f.cols());
    v.middleRows(extra, n0) = f.values;
    f = Grid2D(f.a_lo - extra * d, f.a_hi + extra * d, v);
  }
  const Eigen::ArrayXd vc = V(f.a_centers());
  const double r = dt / d;
  if (r * occupied_vmax(f.values.rowwise().sum(), vc) > 1.0 + 1e-12)
    throw SolverError("split_step_f: activity CFL condition violated");
  f.values = upwind_rows(f.values, vc, r);
  return f;
}

}  // namespace

double eval_nonlocal_K(const Grid2D& f, const InteractionKernels& kernels, const ModelParams& params, double w) {
  const Eigen::ArrayXd H = weighted_opinion_marginal(f, params) * f.dw();
  const Eigen::ArrayXd v = f.w_centers();
  if (kernels.unit_influence()) return w * H.sum() - (H * v).sum();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) acc += H[j] * kernels.G(w, v[j]) * (w - v[j]);
  return acc;
}

FStepLimits split_step_limits(const Grid2D& f, const ModelParams& params, const InteractionKernels& kernels,
                              Channels channels, bool controlled) {
  FStepLimits lim{kInf, kInf};
  const std::vector<OpinionDrift> drifts = row_drifts(f, params, kernels, channels);
  const Grid1D row = Grid1D::opinion(f.cols());
  for (const OpinionDrift& d : drifts) lim.opinion_dt = std::min(lim.opinion_dt, 2.0 * drift_cfl_dt(row, d));
  const ActivityVelocity V(params, channels, controlled);
  const double vmax = occupied_vmax(f.values.rowwise().sum(), V(f.a_centers()));
  if (vmax > 0.0) lim.activity_dt = f.dA() / vmax;
  return lim;
}

Grid2D split_step_f(const Grid2D& f, const ModelParams& params, const InteractionKernels& kernels, Channels channels,
                    bool controlled, double dt) {
  require_nonnegative(f.values.reshaped(), "split_step_f");
  if (!(dt > 0.0)) throw SolverError("split_step_f: dt must be positive");
  const Grid2D half = opinion_substep(f, params, kernels, channels, 0.5 * dt);
  const Grid2D moved = activity_substep(half, ActivityVelocity(params, channels, controlled), dt);
  return opinion_substep(moved, params, kernels, channels, 0.5 * dt);
}

}  // namespace kinop
