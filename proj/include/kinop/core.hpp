#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "kinop/errors.hpp"

namespace kinop {

template <typename Scalar>
using ArrayX = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

// Which interaction channels act on the opinions.
enum class Channels { Agents, Leaders, Both };

enum class FadeRegime { CaseI, CaseII, CaseIII };

std::string to_string(Channels c);
std::string to_string(FadeRegime r);

// Rates and noise levels of the kinetic model.
// eps_floor is the interaction-probability floor; qi_scale is the
// quasi-invariant scaling parameter used by the Monte Carlo engine.
struct ModelParams {
  double lambda_p = 0.5;
  double lambda_l = 0.5;
  double lambda_A = 0.1;
  double lambda_c = 0.1;
  double sigma2_p = 0.05;
  double sigma2_l = 0.05;
  double omega_p = 0.8;
  double omega_l = 0.75;
  double eps_floor = 0.05;
  double gamma = 1.0;
  double a_p = 0.45;
  double a_l = 0.425;
  double theta = 0.3;
  double qi_scale = 0.01;
  double mu_l = 0.0;

  double nu_p() const { return sigma2_p / lambda_p; }
  double nu_l() const { return sigma2_l / lambda_l; }

  // Throws ConfigError naming the first violated constraint.
  void validate() const;

  // Copy with lambda -> qi_scale*lambda and sigma^2 -> qi_scale*sigma^2.
  ModelParams scaled() const;

  bool operator==(const ModelParams&) const = default;
};

// One activity channel: interaction probability slope, floor and fade.
// The leader-inclusive channel sums the agent and leader channels.
struct ActivityChannel {
  double omega;
  double eps;
  double fade;
};

inline ActivityChannel agent_channel(const ModelParams& p) { return {p.omega_p, p.eps_floor, p.a_p}; }
inline ActivityChannel leader_channel(const ModelParams& p) { return {p.omega_l, p.eps_floor, p.a_l}; }
inline ActivityChannel combined_channel(const ModelParams& p) {
  return {p.omega_p + p.omega_l, 2.0 * p.eps_floor, p.a_p + p.a_l};
}
// Channel governing the activity dynamics: agent encounters always act, and
// leader encounters add the leader channel whenever leaders are present.
ActivityChannel activity_channel(const ModelParams& p, Channels channels);

template <typename Scalar>
Scalar activity_weight(Scalar A, Scalar gamma) {
  if (A >= gamma) return Scalar(1);
  if (A <= -gamma) return Scalar(0);
  return Scalar(0.5) + A / (Scalar(2) * gamma);
}

template <typename Derived>
auto activity_weight(const Eigen::ArrayBase<Derived>& A, typename Derived::Scalar gamma) {
  using Scalar = typename Derived::Scalar;
  return (A / (Scalar(2) * gamma) + Scalar(0.5)).max(Scalar(0)).min(Scalar(1));
}

template <typename Scalar>
Scalar interact_prob(Scalar weight, Scalar omega, Scalar eps_floor) {
  if (!(omega + eps_floor < Scalar(1)))
    throw DomainError("interact_prob: omega + eps_floor must be < 1");
  return weight * omega + eps_floor;
}

template <typename Scalar>
Scalar default_fade(Scalar omega, Scalar eps_floor) {
  return omega / Scalar(2) + eps_floor;
}

template <typename Scalar>
FadeRegime classify_fade(Scalar a, Scalar omega, Scalar eps_floor) {
  if (!(a > Scalar(0))) throw DomainError("classify_fade: fade constant must be positive");
  // Boundaries are matched to a few ulps so that a = omega + eps typed in decimal is caught.
  const Scalar tol = Scalar(4) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + omega + eps_floor);
  if (std::abs(a - eps_floor) <= tol || std::abs(a - (omega + eps_floor)) <= tol)
    throw DomainError("classify_fade: fade constant on a regime boundary");
  if (a < eps_floor) return FadeRegime::CaseI;
  if (a < omega + eps_floor) return FadeRegime::CaseII;
  return FadeRegime::CaseIII;
}

// Mean activity drift of one channel, weight*omega + eps - fade.
template <typename Scalar>
Scalar channel_drift(Scalar weight, const ActivityChannel& ch) {
  return weight * Scalar(ch.omega) + Scalar(ch.eps) - Scalar(ch.fade);
}

// Influence kernel G(w,v) and diffusion localizer D(w).
// The unit influence and the default localizer sqrt(1-w^2) are tagged so
// solvers can use closed forms.
class InteractionKernels {
 public:
  using Influence = std::function<double(double, double)>;
  using Localizer = std::function<double(double)>;

  static InteractionKernels standard();
  // G(w,v) = max(0, 1 - |w-v|/radius).
  static InteractionKernels bounded_confidence(double radius);
  static InteractionKernels custom(Influence G, Localizer D, std::string description);

  double G(double w, double v) const { return unit_influence_ ? 1.0 : G_(w, v); }
  double D(double w) const {
    if (default_localizer_) return std::sqrt(std::max(0.0, 1.0 - w * w));
    return D_(w);
  }
  bool unit_influence() const { return unit_influence_; }
  bool default_localizer() const { return default_localizer_; }
  const std::string& description() const { return description_; }
  // Radius of the bounded-confidence kernel, 0 otherwise.
  double radius() const { return radius_; }

 private:
  Influence G_;
  Localizer D_;
  bool unit_influence_ = true;
  bool default_localizer_ = true;
  double radius_ = 0.0;
  std::string description_ = "unit";
};

}  // namespace kinop
