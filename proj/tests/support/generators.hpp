#pragma once

// Seeded generators for property tests. Every case is reproducible from the
// seed printed by CAPTURE in the failing test.

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

#include "kinop/core.hpp"
#include "kinop/grid.hpp"

namespace gen {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  long integer(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(rng_); }
  std::mt19937_64& engine() { return rng_; }

  // Parameters satisfying every ModelParams constraint.
  kinop::ModelParams params() {
    kinop::ModelParams p;
    p.lambda_p = uniform(0.05, 0.95);
    p.lambda_l = uniform(0.05, 0.95);
    p.lambda_A = uniform(0.01, 0.5);
    p.lambda_c = uniform(0.01, 0.9);
    p.sigma2_p = uniform(0.005, 0.2);
    p.sigma2_l = uniform(0.005, 0.2);
    p.eps_floor = uniform(0.01, 0.2);
    p.omega_p = uniform(p.eps_floor + 0.01, 0.98 - p.eps_floor);
    p.omega_l = uniform(p.eps_floor + 0.01, 0.98 - p.eps_floor);
    p.gamma = uniform(0.2, 3.0);
    p.a_p = uniform(0.01, 1.2);
    p.a_l = uniform(0.01, 1.2);
    p.theta = uniform(0.02, 0.98);
    p.qi_scale = uniform(0.001, 1.0);
    p.mu_l = uniform(-0.9, 0.9);
    return p;
  }

  // Smooth positive density on n opinion cells: a floor plus up to three
  // Gaussian bumps, normalized to unit mass.
  kinop::Grid1D smooth_density(Eigen::Index n) {
    const int bumps = static_cast<int>(integer(1, 3));
    double c[3], s[3], h[3];
    for (int k = 0; k < bumps; ++k) {
      c[k] = uniform(-0.9, 0.9);
      s[k] = uniform(0.08, 0.6);
      h[k] = uniform(0.2, 2.0);
    }
    const double floor = uniform(0.01, 0.3);
    auto f = [&](double w) {
      double v = floor;
      for (int k = 0; k < bumps; ++k) v += h[k] * std::exp(-0.5 * (w - c[k]) * (w - c[k]) / (s[k] * s[k]));
      return v;
    };
    return kinop::normalized(kinop::project_density(kinop::Axis::Opinion, -1.0, 1.0, n, f));
  }

  // Nonnegative density with random cell values, some cells zeroed.
  kinop::Grid1D rough_density(Eigen::Index n) {
    kinop::Grid1D g = kinop::Grid1D::opinion(n);
    for (Eigen::Index i = 0; i < n; ++i) g.values(i) = coin(0.2) ? 0.0 : uniform(0.0, 1.0);
    g.values(integer(0, n - 1)) += 1.0;
    return kinop::normalized(g);
  }

 private:
  std::mt19937_64 rng_;
};

}  // namespace gen
