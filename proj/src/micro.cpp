#include "kinop/micro.hpp"

#include <string>

namespace kinop {

namespace {

// Roundoff slack when confining post-interaction opinions.
constexpr double kConfineSlack = 1e-12;

double confine(double w_new) {
  if (std::abs(w_new) > 1.0 + kConfineSlack)
    throw DomainError("noise draw moves the opinion outside [-1,1]: w' = " + std::to_string(w_new));
  return std::clamp(w_new, -1.0, 1.0);
}

}  // namespace

std::pair<AgentState, AgentState> agent_agent_update(const AgentState& a, const AgentState& b,
                                                     const ModelParams& params,
                                                     const InteractionKernels& kernels,
                                                     const InteractionDraw& draw_a,
                                                     const InteractionDraw& draw_b) {
  const double both = (draw_a.tilde_A && draw_b.tilde_A) ? 1.0 : 0.0;
  const double g = both * kernels.G(a.w, b.w) * params.lambda_p;
  AgentState a2, b2;
  a2.w = confine(a.w + g * (b.w - a.w) + kernels.D(a.w) * draw_a.eta);
  b2.w = confine(b.w + g * (a.w - b.w) + kernels.D(b.w) * draw_b.eta);
  a2.A = a.A + params.lambda_A * ((draw_a.tilde_A ? 1.0 : 0.0) - params.a_p);
  b2.A = b.A + params.lambda_A * ((draw_b.tilde_A ? 1.0 : 0.0) - params.a_p);
  return {a2, b2};
}

AgentState agent_leader_update(const AgentState& a, double z, const ModelParams& params,
                               const InteractionKernels& kernels, const InteractionDraw& draw) {
  if (z < -1.0 || z > 1.0) throw DomainError("leader opinion outside [-1,1]");
  const double t = draw.tilde_A ? 1.0 : 0.0;
  AgentState out;
  out.w = confine(a.w + t * kernels.G(a.w, z) * params.lambda_l * (z - a.w) + kernels.D(a.w) * draw.eta);
  out.A = a.A + params.lambda_A * (t - params.a_l);
  return out;
}

double expected_activity_increment(double A, const ModelParams& params, ActivitySource source) {
  const ActivityChannel ch = source == ActivitySource::Agent ? agent_channel(params) : leader_channel(params);
  return params.lambda_A * channel_drift(activity_weight(A, params.gamma), ch);
}

}  // namespace kinop
