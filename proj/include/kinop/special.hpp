#pragma once

namespace kinop {

// ln B(a, b) via log-gamma.
double log_beta(double a, double b);

// Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0,1].
double incomplete_beta(double x, double a, double b);

}  // namespace kinop
