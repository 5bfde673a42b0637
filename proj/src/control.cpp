#include "kinop/control.hpp"

#include <cmath>
#include <sstream>

namespace kinop {

std::string to_string(ControlVerdict v) {
  switch (v) {
    case ControlVerdict::Effective: return "effective";
    case ControlVerdict::PartiallyEffective: return "partially-effective";
    case ControlVerdict::Ineffective: return "ineffective";
    case ControlVerdict::Unnecessary: return "unnecessary";
  }
  return "?";
}

FluxCoefficients flux_coefficients(const ModelParams& p, Channels channels) {
  const ActivityChannel ch = activity_channel(p, channels);
  const double uncontrolled = (1.0 - p.theta) * p.lambda_A;
  const double pull = p.theta * p.gamma * p.lambda_c / 2.0;
  FluxCoefficients c{uncontrolled * (ch.eps - ch.fade) + pull, uncontrolled * (ch.omega + ch.eps - ch.fade) - pull};
  // Cancellations such as the balanced case leave roundoff of this size.
  const double scale = 1e-13 * (uncontrolled * (ch.omega + ch.eps + ch.fade) + pull);
  if (std::abs(c.C_i) <= scale) c.C_i = 0.0;
  if (std::abs(c.C_a) <= scale) c.C_a = 0.0;
  return c;
}

std::optional<OpenInterval> admissible_lambda_c(const ModelParams& p, Channels channels) {
  const ActivityChannel ch = activity_channel(p, channels);
  if (!(p.theta > 0.0) || !(ch.fade > ch.eps) || !(ch.fade < ch.omega / 2.0 + ch.eps)) return std::nullopt;
  const double k = (2.0 / p.gamma) * ((1.0 - p.theta) / p.theta) * p.lambda_A;
  return OpenInterval{k * (ch.fade - ch.eps), k * (ch.omega + ch.eps - ch.fade)};
}

std::optional<OpenInterval> admissible_theta(const ModelParams& p, Channels channels) {
  const ActivityChannel ch = activity_channel(p, channels);
  if (!(ch.fade > ch.eps) || !(ch.fade < ch.omega / 2.0 + ch.eps)) return std::nullopt;
  const double lo = ch.fade - ch.eps;
  const double hi = ch.omega + ch.eps - ch.fade;
  return OpenInterval{lo / (p.gamma / 2.0 + lo), hi / (p.gamma / 2.0 + hi)};
}

FixedPoints fixed_points(const ModelParams& p, Channels channels) {
  const ActivityChannel ch = activity_channel(p, channels);
  FixedPoints fp;
  if (ch.fade > ch.eps && ch.fade < ch.omega + ch.eps)
    fp.A_p_star = (2.0 * p.gamma / ch.omega) * (ch.fade - ch.eps) - p.gamma;
  if (p.theta > 0.0)
    fp.A_c_star = 2.0 * ((1.0 - p.theta) / p.theta) * (p.lambda_A / p.lambda_c) * (ch.omega + ch.eps - ch.fade);
  return fp;
}

double balanced_lambda_c(const ModelParams& p, Channels channels) {
  const ActivityChannel ch = activity_channel(p, channels);
  return ((1.0 - p.theta) / p.theta) * p.lambda_A * ch.omega / p.gamma;
}

ControlFeasibility special_case_verdict(const ModelParams& p, Channels channels) {
  const ActivityChannel ch = activity_channel(p, channels);
  ControlFeasibility r;
  const FluxCoefficients c = flux_coefficients(p, channels);
  r.C_i = c.C_i;
  r.C_a = c.C_a;
  r.lambda_c_interval = admissible_lambda_c(p, channels);
  r.theta_interval = admissible_theta(p, channels);
  const FixedPoints f = fixed_points(p, channels);
  r.A_c_star = f.A_c_star;
  r.A_p_star = f.A_p_star;

  std::ostringstream os;
  os.precision(6);
  if (ch.fade < ch.eps) {
    r.verdict = ControlVerdict::Unnecessary;
    os << "a < eps: C_i > 0 without control; control only lowers C_a (C_a = " << c.C_a << ")";
  } else if (c.C_i > 0.0 && c.C_a > 0.0) {
    r.verdict = ControlVerdict::Effective;
    os << "C_i = " << c.C_i << " > 0 and C_a = " << c.C_a << " > 0";
  } else if (c.C_i == 0.0 && c.C_a == 0.0) {
    r.verdict = ControlVerdict::Ineffective;
    os << "C_i = C_a = 0: the fluxes cancel and the active and inactive fractions stay constant";
  } else if (c.C_i > 0.0 || c.C_a > 0.0) {
    r.verdict = ControlVerdict::PartiallyEffective;
    os << "only one flux positive (C_i = " << c.C_i << ", C_a = " << c.C_a << ")";
    if (ch.fade > ch.omega + ch.eps) os << "; a > omega + eps forces C_a < 0, strong control gives C_i > 0";
  } else {
    r.verdict = ControlVerdict::Ineffective;
    os << "C_i = " << c.C_i << " <= 0 and C_a = " << c.C_a << " <= 0";
    if (ch.fade > ch.omega + ch.eps) os << "; a > omega + eps forces C_a < 0 and the control is weak";
  }
  r.explanation = os.str();
  return r;
}

}  // namespace kinop
