#pragma once

#include <optional>
#include <string>

#include "kinop/core.hpp"

namespace kinop {

struct OpenInterval {
  double lo;
  double hi;
  bool contains(double x) const { return x > lo && x < hi; }
};

struct FluxCoefficients {
  double C_i;  // rate at which inactive mass crosses -gamma into the undecided band
  double C_a;  // rate at which undecided mass crosses gamma into the active region
};

enum class ControlVerdict { Effective, PartiallyEffective, Ineffective, Unnecessary };
std::string to_string(ControlVerdict v);

struct ControlFeasibility {
  double C_i = 0.0;
  double C_a = 0.0;
  std::optional<OpenInterval> lambda_c_interval;
  std::optional<OpenInterval> theta_interval;  // for lambda_c = lambda_A
  std::optional<double> A_c_star;
  std::optional<double> A_p_star;
  ControlVerdict verdict = ControlVerdict::Ineffective;
  std::string explanation;  // the inequality that decided the verdict
};

// All control functions act on the activity channel selected by `channels`:
// Agents uses (omega_p, eps, a_p); with leaders present the channel is
// (omega_p + omega_l, 2 eps, a_p + a_l).

FluxCoefficients flux_coefficients(const ModelParams& params, Channels channels = Channels::Agents);

// Open lambda_c interval making both fluxes positive; empty unless eps < a < omega/2 + eps.
std::optional<OpenInterval> admissible_lambda_c(const ModelParams& params, Channels channels = Channels::Agents);

// Open theta interval making both fluxes positive when lambda_c = lambda_A;
// params.lambda_c is ignored. Empty unless eps < a < omega/2 + eps.
std::optional<OpenInterval> admissible_theta(const ModelParams& params, Channels channels = Channels::Agents);

struct FixedPoints {
  std::optional<double> A_p_star;  // present in CaseII only
  std::optional<double> A_c_star;  // present when theta > 0
};
FixedPoints fixed_points(const ModelParams& params, Channels channels = Channels::Agents);

ControlFeasibility special_case_verdict(const ModelParams& params, Channels channels = Channels::Agents);

// Balanced control strength lambda_c = ((1-theta)/theta) lambda_A omega / gamma that
// zeroes both fluxes when a = omega/2 + eps.
double balanced_lambda_c(const ModelParams& params, Channels channels = Channels::Agents);

}  // namespace kinop
