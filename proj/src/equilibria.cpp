#include "kinop/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "kinop/special.hpp"

namespace kinop {

std::string to_string(Regime r) { return r == Regime::Polarization ? "polarization" : "consensus"; }

double log_beta_normalization(double b1, double b2) {
  if (!(b1 > 0.0) || !(b2 > 0.0)) throw DomainError("beta_normalization: exponents must be positive");
  return -((b1 + b2 - 1.0) * std::log(2.0) + log_beta(b1, b2));
}

double beta_normalization(double b1, double b2) { return std::exp(log_beta_normalization(b1, b2)); }

BetaEquilibrium::BetaEquilibrium(double b1, double b2) : b1_(b1), b2_(b2), log_c_(0.0) {
  if (!(b1 > 0.0) || !(b2 > 0.0))
    throw DomainError("Beta equilibrium requires positive exponents (b1 = " + std::to_string(b1) +
                      ", b2 = " + std::to_string(b2) + ")");
  log_c_ = log_beta_normalization(b1, b2);
}

double BetaEquilibrium::density(double w) const {
  if (w < -1.0 || w > 1.0) return 0.0;
  return std::exp(log_c_ + (b1_ - 1.0) * std::log1p(-w) + (b2_ - 1.0) * std::log1p(w));
}

// Under x = (1+w)/2 the law is Beta(b2, b1) on [0,1].
double BetaEquilibrium::cdf(double w) const {
  return incomplete_beta(std::clamp(0.5 * (1.0 + w), 0.0, 1.0), b2_, b1_);
}

double BetaEquilibrium::mass(double w0, double w1) const {
  const double x0 = std::clamp(0.5 * (1.0 + w0), 0.0, 1.0);
  const double x1 = std::clamp(0.5 * (1.0 + w1), 0.0, 1.0);
  const double split = b2_ / (b1_ + b2_);
  if (x1 <= split) return incomplete_beta(x1, b2_, b1_) - incomplete_beta(x0, b2_, b1_);
  // Upper tail through the reflected law keeps small masses accurate.
  return incomplete_beta(1.0 - x0, b1_, b2_) - incomplete_beta(1.0 - x1, b1_, b2_);
}

Grid1D BetaEquilibrium::cell_averages(Eigen::Index n) const {
  Grid1D g = Grid1D::opinion(n);
  const Eigen::ArrayXd e = g.edges();
  for (Eigen::Index i = 0; i < n; ++i) g.values[i] = std::max(0.0, mass(e[i], e[i + 1])) / g.dx();
  return g;
}

Grid1D BetaEquilibrium::point_values(Eigen::Index n) const {
  Grid1D g = Grid1D::opinion(n);
  const Eigen::ArrayXd c = g.centers();
  // Relative to the largest log-density to avoid overflow for large exponents.
  Eigen::ArrayXd logd = (b1_ - 1.0) * (-c).log1p() + (b2_ - 1.0) * c.log1p();
  g.values = (logd - logd.maxCoeff()).exp();
  return normalized(g);
}

namespace {

BetaExponents agent_part(double weight, double rho_bar, double m_bar, const ModelParams& p) {
  if (!(std::abs(m_bar) < rho_bar))
    throw DomainError("partial equilibrium requires |m_bar| < rho_bar (Dirac limit otherwise)");
  const double k = weight * p.omega_p + p.eps_floor;
  return {k * (rho_bar - m_bar), k * (rho_bar + m_bar)};
}

BetaExponents leader_part(double weight, const ModelParams& p) {
  if (!(std::abs(p.mu_l) < 1.0)) throw DomainError("leader channel requires |mu_l| < 1 (Dirac limit otherwise)");
  const double k = weight * p.omega_l + p.eps_floor;
  return {k * (1.0 - p.mu_l), k * (1.0 + p.mu_l)};
}

}  // namespace

BetaExponents partial_equilibrium(ActivityWeight weight, double rho_bar, double m_bar,
                                  const ModelParams& params, Channels source) {
  const double wt = weight.value;
  switch (source) {
    case Channels::Agents: {
      const BetaExponents a = agent_part(wt, rho_bar, m_bar, params);
      return {a.b1 / params.nu_p(), a.b2 / params.nu_p()};
    }
    case Channels::Leaders: {
      const BetaExponents l = leader_part(wt, params);
      return {l.b1 / params.nu_l(), l.b2 / params.nu_l()};
    }
    case Channels::Both: {
      const BetaExponents a = agent_part(wt, rho_bar, m_bar, params);
      const BetaExponents l = leader_part(wt, params);
      const double s2 = params.sigma2_p + params.sigma2_l;
      return {(params.lambda_p * a.b1 + params.lambda_l * l.b1) / s2,
              (params.lambda_p * a.b2 + params.lambda_l * l.b2) / s2};
    }
  }
  return {0.0, 0.0};
}

BetaExponents partial_equilibrium(double A, double rho_bar, double m_bar, const ModelParams& params,
                                  Channels source) {
  return partial_equilibrium(ActivityWeight{activity_weight(A, params.gamma)}, rho_bar, m_bar, params, source);
}

RegimeReport classify_regime(double rho_bar, double m_bar, const ModelParams& params) {
  RegimeReport r{};
  r.active = partial_equilibrium(ActivityWeight{1.0}, rho_bar, m_bar, params, Channels::Agents);
  r.inactive = partial_equilibrium(ActivityWeight{0.0}, rho_bar, m_bar, params, Channels::Agents);
  auto verdict = [](const BetaExponents& b) {
    return std::min(b.b1, b.b2) < 1.0 ? Regime::Polarization : Regime::Consensus;
  };
  r.regime_active = verdict(r.active);
  r.regime_inactive = verdict(r.inactive);
  // Exponents increase with the weight, so this quadrant is unreachable.
  if (r.regime_inactive == Regime::Consensus && r.regime_active == Regime::Polarization)
    throw std::logic_error("classify_regime: consensus among inactive with polarization among active");
  if (r.mixed()) {
    const double lo = std::min(rho_bar - m_bar, rho_bar + m_bar) / params.nu_p();
    const double a_star = (1.0 / params.omega_p) / lo - params.eps_floor / params.omega_p;
    const double level = params.gamma * (2.0 * a_star - 1.0);
    if (!(a_star > 0.0 && a_star < 1.0) || !(level > -params.gamma && level < params.gamma))
      throw std::logic_error("classify_regime: threshold outside the undecided band");
    r.A_star = a_star;
    r.A_star_level = level;
  }
  return r;
}

BetaExponents global_exponents(const ModelParams& p, Channels mode, double m_in) {
  switch (mode) {
    case Channels::Agents: {
      if (!(std::abs(m_in) < 1.0)) throw DomainError("agents-only equilibrium requires |m_in| < 1");
      const double k = alpha_rate(p) / p.sigma2_p;
      return {k * (1.0 - m_in), k * (1.0 + m_in)};
    }
    case Channels::Leaders: {
      if (!(std::abs(p.mu_l) < 1.0)) throw DomainError("leader equilibrium requires |mu_l| < 1");
      const double k = beta_rate(p) / p.sigma2_l;
      return {k * (1.0 - p.mu_l), k * (1.0 + p.mu_l)};
    }
    case Channels::Both: {
      if (!(std::abs(p.mu_l) < 1.0)) throw DomainError("leader equilibrium requires |mu_l| < 1");
      const double k = (alpha_rate(p) + beta_rate(p)) / (p.sigma2_p + p.sigma2_l);
      return {k * (1.0 - p.mu_l), k * (1.0 + p.mu_l)};
    }
  }
  return {0.0, 0.0};
}

BetaEquilibrium global_equilibrium_h(const ModelParams& p, Channels mode, double m_in) {
  return BetaEquilibrium(global_exponents(p, mode, m_in));
}

BetaExponents local_exponents(double m_w, const ModelParams& p) {
  if (!(std::abs(p.mu_l) < 1.0)) throw DomainError("local equilibrium requires |mu_l| < 1");
  if (!(std::abs(m_w) <= 1.0)) throw DomainError("local equilibrium requires |m_w| <= 1");
  const double a = alpha_rate(p), b = beta_rate(p), s2 = p.sigma2_p + p.sigma2_l;
  return {(a * (1.0 - m_w) + b * (1.0 - p.mu_l)) / s2, (a * (1.0 + m_w) + b * (1.0 + p.mu_l)) / s2};
}

BetaEquilibrium local_equilibrium_h(double m_w, const ModelParams& p) {
  return BetaEquilibrium(local_exponents(m_w, p));
}

RegularityIndices regularity_indices(const ModelParams& p, double m_in) {
  RegularityIndices r;
  const double a = alpha_rate(p), b = beta_rate(p), s2 = p.sigma2_p + p.sigma2_l;
  const double arg_star = 1.0 - (a + b) / s2 * (1.0 - std::abs(p.mu_l));
  if (arg_star > 0.0) {
    r.q_star = 1.0 / arg_star;
  } else {
    r.infinity_regular = true;
  }
  const double sup_m = std::max(std::abs(m_in), std::abs(p.mu_l));
  const double arg_bar = 1.0 - a / s2 * (1.0 - sup_m) - b / s2 * (1.0 - std::abs(p.mu_l));
  if (arg_bar > 0.0) r.q_bar = 1.0 / arg_bar;
  r.tau_coefficient = a + b - s2;
  r.beta = b;
  return r;
}

}  // namespace kinop
