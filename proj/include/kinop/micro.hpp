#pragma once

#include <cmath>
#include <utility>

#include "kinop/core.hpp"

namespace kinop {

struct AgentState {
  double w = 0.0;
  double A = 0.0;
};

// Per-agent randomness of one binary encounter: the Bernoulli interaction
// outcome and the self-thinking noise realization.
struct InteractionDraw {
  bool tilde_A = false;
  double eta = 0.0;
};

enum class ActivitySource { Agent, Leader };

// Binary agent-agent encounter. The compromise acts only if both agents interact.
// Throws DomainError if a noise draw pushes an opinion out of [-1,1].
std::pair<AgentState, AgentState> agent_agent_update(const AgentState& a, const AgentState& b,
                                                     const ModelParams& params,
                                                     const InteractionKernels& kernels,
                                                     const InteractionDraw& draw_a,
                                                     const InteractionDraw& draw_b);

AgentState agent_leader_update(const AgentState& a, double z, const ModelParams& params,
                               const InteractionKernels& kernels, const InteractionDraw& draw);

template <typename Scalar>
Scalar controlled_activity_update(Scalar A, Scalar lambda_c) {
  return A * (Scalar(1) - lambda_c / Scalar(2));
}

// lambda_A * (weight(A)*omega + eps - fade) for the chosen channel.
double expected_activity_increment(double A, const ModelParams& params, ActivitySource source);

// Largest |D(w) eta| that keeps w' in [-1,1] under any compromise of rate <= compromise_rate.
inline double noise_bound(double w, double compromise_rate) {
  return (1.0 - compromise_rate) * (1.0 - std::abs(w));
}

// Centered uniform noise of variance sigma2, conditioned on |D(w) eta| <= noise_bound.
// Uniform conditioned on a symmetric subinterval is uniform on that subinterval,
// so the conditioning is sampled directly and stays centered.
template <typename Rng>
double sample_bounded_noise(double w, double sigma2, const InteractionKernels& kernels,
                            double compromise_rate, Rng& rng) {
  const double c = std::sqrt(3.0 * sigma2);
  const double d = kernels.D(w);
  double half_width = c;
  if (d > 0.0) half_width = std::min(c, noise_bound(w, compromise_rate) / d);
  return half_width * (2.0 * rng.uniform() - 1.0);
}

}  // namespace kinop
