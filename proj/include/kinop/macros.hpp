#pragma once

namespace kinop {

// Macroscopic observables at time t. rho_bar and m_bar are the mass and mean
// opinion weighted by weight(A) omega_p + eps.
struct Macros {
  double t = 0.0;
  double rho_a = 0.0;
  double rho_u = 0.0;
  double rho_i = 0.0;
  double m_w = 0.0;
  double m_A = 0.0;
  double rho_bar = 0.0;
  double m_bar = 0.0;
};

}  // namespace kinop
