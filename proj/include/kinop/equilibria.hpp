#pragma once

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <vector>

#include "kinop/core.hpp"
#include "kinop/grid.hpp"

namespace kinop {

// Exponents of a density proportional to (1-w)^(b1-1) (1+w)^(b2-1); may be nonpositive.
struct BetaExponents {
  double b1;
  double b2;
  // Exponents of the density itself, b - 1; negative means divergence at that endpoint.
  double power_at_plus_one() const { return b1 - 1.0; }
  double power_at_minus_one() const { return b2 - 1.0; }
};

// 1 / integral of (1-w)^(b1-1) (1+w)^(b2-1) over [-1,1], evaluated in log space.
double beta_normalization(double b1, double b2);
double log_beta_normalization(double b1, double b2);

class BetaEquilibrium {
 public:
  // Throws DomainError unless b1, b2 > 0.
  BetaEquilibrium(double b1, double b2);
  explicit BetaEquilibrium(const BetaExponents& b) : BetaEquilibrium(b.b1, b.b2) {}

  double b1() const { return b1_; }
  double b2() const { return b2_; }
  BetaExponents exponents() const { return {b1_, b2_}; }
  double normalization() const { return std::exp(log_c_); }
  double density(double w) const;
  double cdf(double w) const;
  // Probability of [w0, w1], accurate in both tails.
  double mass(double w0, double w1) const;
  double mean() const { return (b2_ - b1_) / (b1_ + b2_); }
  // Exact cell averages (cell mass / width) on n uniform opinion cells.
  Grid1D cell_averages(Eigen::Index n) const;
  // Density at cell centers rescaled to unit discrete mass.
  Grid1D point_values(Eigen::Index n) const;

 private:
  double b1_;
  double b2_;
  double log_c_;
};

// Activity weight as a distinct argument type, for callers holding A-bar directly.
struct ActivityWeight {
  double value;
};

// Partial equilibrium exponents at activity A (or weight A-bar) given the weighted
// moments rho_bar, m_bar. Throws DomainError if |m_bar| >= rho_bar on the agent
// channel or |mu_l| >= 1 on the leader channel.
BetaExponents partial_equilibrium(double A, double rho_bar, double m_bar, const ModelParams& params,
                                  Channels source);
BetaExponents partial_equilibrium(ActivityWeight weight, double rho_bar, double m_bar,
                                  const ModelParams& params, Channels source);

enum class Regime { Polarization, Consensus };
std::string to_string(Regime r);

struct RegimeReport {
  Regime regime_active;
  Regime regime_inactive;
  BetaExponents active;    // weight 1
  BetaExponents inactive;  // weight 0
  // Weight threshold from the closed-form display; present iff the regime is mixed.
  std::optional<double> A_star;
  // The same threshold mapped to an activity level, gamma (2 A_star - 1) in (-gamma, gamma).
  std::optional<double> A_star_level;
  bool mixed() const { return regime_active != regime_inactive; }
};

// Agent-channel regime classification at weights 1 and 0.
RegimeReport classify_regime(double rho_bar, double m_bar, const ModelParams& params);

// Global equilibrium exponents of the opinion marginal. Agents uses m_in as the
// conserved mean; Leaders and Both use mu_l. Throws DomainError at the Dirac limits.
BetaExponents global_exponents(const ModelParams& params, Channels mode, double m_in = 0.0);
BetaEquilibrium global_equilibrium_h(const ModelParams& params, Channels mode, double m_in = 0.0);

// Equilibrium of the full operator frozen at the current mean m_w.
BetaExponents local_exponents(double m_w, const ModelParams& params);
BetaEquilibrium local_equilibrium_h(double m_w, const ModelParams& params);

// Integrability of the global and local equilibria and the rate constants of
// the L^q estimate.
struct RegularityIndices {
  std::optional<double> q_star;  // absent when infinity_regular
  bool infinity_regular = false;
  std::optional<double> q_bar;  // absent when the local equilibria are bounded
  double tau_coefficient = 0.0;  // alpha + beta - sigma_p^2 - sigma_l^2
  double beta = 0.0;             // lambda_l (omega_l + eps)

  double tau(double q) const { return (q - 1.0) / q * tau_coefficient; }
  // 0 <= tau_q < beta.
  bool feasible(double q) const { return tau(q) >= 0.0 && tau(q) < beta; }
};

RegularityIndices regularity_indices(const ModelParams& params, double m_in);

// Compromise rate alpha = lambda_p (omega_p + eps)^2 of the all-active reduction.
inline double alpha_rate(const ModelParams& p) {
  return p.lambda_p * (p.omega_p + p.eps_floor) * (p.omega_p + p.eps_floor);
}
// Leader attraction rate beta = lambda_l (omega_l + eps).
inline double beta_rate(const ModelParams& p) { return p.lambda_l * (p.omega_l + p.eps_floor); }

}  // namespace kinop
