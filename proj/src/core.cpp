#include "kinop/core.hpp"

#include <algorithm>
#include <sstream>

namespace kinop {

std::string to_string(Channels c) {
  switch (c) {
    case Channels::Agents: return "agents";
    case Channels::Leaders: return "leaders";
    case Channels::Both: return "both";
  }
  return "?";
}

std::string to_string(FadeRegime r) {
  switch (r) {
    case FadeRegime::CaseI: return "CaseI";
    case FadeRegime::CaseII: return "CaseII";
    case FadeRegime::CaseIII: return "CaseIII";
  }
  return "?";
}

namespace {

void require(bool ok, const std::string& field, const std::string& rule) {
  if (!ok) throw ConfigError(field + ": must satisfy " + rule);
}

bool open_unit(double x) { return x > 0.0 && x < 1.0; }

}  // namespace

void ModelParams::validate() const {
  require(open_unit(lambda_p), "lambda_p", "0 < lambda_p < 1");
  require(open_unit(lambda_l), "lambda_l", "0 < lambda_l < 1");
  require(open_unit(lambda_A), "lambda_A", "0 < lambda_A < 1");
  require(open_unit(lambda_c), "lambda_c", "0 < lambda_c < 1");
  require(sigma2_p > 0.0 && std::isfinite(sigma2_p), "sigma2_p", "sigma2_p > 0");
  require(sigma2_l > 0.0 && std::isfinite(sigma2_l), "sigma2_l", "sigma2_l > 0");
  require(omega_p > 0.0, "omega_p", "omega_p > 0");
  require(omega_l > 0.0, "omega_l", "omega_l > 0");
  require(eps_floor > 0.0, "eps_floor", "eps_floor > 0");
  require(omega_p + eps_floor < 1.0, "omega_p", "omega_p + eps_floor < 1");
  require(eps_floor < omega_p, "eps_floor", "eps_floor < omega_p");
  require(omega_l + eps_floor < 1.0, "omega_l", "omega_l + eps_floor < 1");
  require(eps_floor < omega_l, "eps_floor", "eps_floor < omega_l");
  require(gamma > 0.0 && std::isfinite(gamma), "gamma", "gamma > 0");
  require(a_p > 0.0 && std::isfinite(a_p), "a_p", "a_p > 0");
  require(a_l > 0.0 && std::isfinite(a_l), "a_l", "a_l > 0");
  require(theta >= 0.0 && theta <= 1.0, "theta", "0 <= theta <= 1");
  require(qi_scale > 0.0 && qi_scale <= 1.0, "qi_scale", "0 < qi_scale <= 1");
  require(mu_l >= -1.0 && mu_l <= 1.0, "mu_l", "-1 <= mu_l <= 1");
}

ModelParams ModelParams::scaled() const {
  ModelParams s = *this;
  s.lambda_p *= qi_scale;
  s.lambda_l *= qi_scale;
  s.lambda_A *= qi_scale;
  s.lambda_c *= qi_scale;
  s.sigma2_p *= qi_scale;
  s.sigma2_l *= qi_scale;
  return s;
}

ActivityChannel activity_channel(const ModelParams& p, Channels channels) {
  switch (channels) {
    case Channels::Agents: return agent_channel(p);
    case Channels::Leaders:
    case Channels::Both: return combined_channel(p);
  }
  return agent_channel(p);
}

InteractionKernels InteractionKernels::standard() { return InteractionKernels{}; }

InteractionKernels InteractionKernels::bounded_confidence(double radius) {
  if (!(radius > 0.0)) throw ConfigError("influence radius must be positive");
  InteractionKernels k;
  k.unit_influence_ = false;
  k.radius_ = radius;
  k.G_ = [radius](double w, double v) { return std::max(0.0, 1.0 - std::abs(w - v) / radius); };
  std::ostringstream os;
  os.precision(17);
  os << "bounded:" << radius;
  k.description_ = os.str();
  return k;
}

InteractionKernels InteractionKernels::custom(Influence G, Localizer D, std::string description) {
  InteractionKernels k;
  if (G) {
    k.unit_influence_ = false;
    k.G_ = std::move(G);
  }
  if (D) {
    k.default_localizer_ = false;
    k.D_ = std::move(D);
  }
  k.description_ = std::move(description);
  return k;
}

}  // namespace kinop
