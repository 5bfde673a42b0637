#include <doctest.h>

#include <cmath>
#include <vector>

#include "kinop/core.hpp"
#include "kinop/micro.hpp"
#include "kinop/rng.hpp"
#include "support/generators.hpp"

using namespace kinop;
using doctest::Approx;

TEST_CASE("activity_weight branches") {
  CHECK(activity_weight(2.0, 1.0) == 1.0);
  CHECK(activity_weight(0.0, 1.0) == 0.5);
  CHECK(activity_weight(-0.5, 1.0) == Approx(0.5 - 0.5 / 2.0).epsilon(1e-15));
  CHECK(activity_weight(-1.0, 1.0) == 0.0);
  CHECK(activity_weight(1.0, 1.0) == 1.0);
  CHECK(activity_weight(-7.0, 2.0) == 0.0);
}

TEST_CASE("activity_weight array form matches scalar form") {
  Eigen::ArrayXd A = Eigen::ArrayXd::LinSpaced(101, -3.0, 3.0);
  const Eigen::ArrayXd w = activity_weight(A, 1.3);
  for (Eigen::Index i = 0; i < A.size(); ++i) CHECK(w(i) == Approx(activity_weight(A(i), 1.3)).epsilon(1e-15));
}

TEST_CASE("activity_weight is monotone and Lipschitz with constant 1/(2 gamma)") {
  gen::Gen g(11);
  for (int c = 0; c < 200; ++c) {
    const double gamma = g.uniform(0.1, 4.0);
    const double x = g.uniform(-3 * gamma, 3 * gamma), y = g.uniform(-3 * gamma, 3 * gamma);
    const double wx = activity_weight(x, gamma), wy = activity_weight(y, gamma);
    CAPTURE(c);
    CHECK(wx >= 0.0);
    CHECK(wx <= 1.0);
    CHECK(std::abs(wx - wy) <= std::abs(x - y) / (2 * gamma) + 1e-15);
    if (x <= y) CHECK(wx <= wy);
    if (std::abs(x) > gamma && std::abs(y) > gamma && x * y > 0) CHECK(wx == wy);
  }
}

TEST_CASE("interact_prob") {
  CHECK(interact_prob(1.0, 0.8, 0.05) == Approx(0.85).epsilon(1e-15));
  CHECK(interact_prob(0.0, 0.8, 0.05) == Approx(0.05).epsilon(1e-15));
  CHECK(interact_prob(0.5, 0.8, 0.05) == Approx(0.45).epsilon(1e-15));
  CHECK_THROWS_AS(interact_prob(0.5, 0.96, 0.05), DomainError);
  CHECK_THROWS_AS(interact_prob(0.5, 0.95, 0.05), DomainError);
}

TEST_CASE("interaction probability is nondecreasing in activity") {
  double prev = -1.0;
  for (double A = -3.0; A <= 3.0; A += 0.01) {
    const double p = interact_prob(activity_weight(A, 1.0), 0.8, 0.05);
    CHECK(p >= prev);
    prev = p;
  }
}

TEST_CASE("default_fade values and regime") {
  CHECK(default_fade(0.8, 0.05) == Approx(0.45).epsilon(1e-15));
  CHECK(default_fade(0.75, 0.05) == Approx(0.425).epsilon(1e-15));
  gen::Gen g(12);
  for (int c = 0; c < 500; ++c) {
    const ModelParams p = g.params();
    CAPTURE(c);
    CHECK(classify_fade(default_fade(p.omega_p, p.eps_floor), p.omega_p, p.eps_floor) == FadeRegime::CaseII);
  }
}

TEST_CASE("classify_fade") {
  CHECK(classify_fade(0.02, 0.8, 0.05) == FadeRegime::CaseI);
  CHECK(classify_fade(0.45, 0.8, 0.05) == FadeRegime::CaseII);
  CHECK(classify_fade(0.9, 0.8, 0.05) == FadeRegime::CaseIII);
  CHECK_THROWS_AS(classify_fade(0.05, 0.8, 0.05), DomainError);
  CHECK_THROWS_AS(classify_fade(0.85, 0.8, 0.05), DomainError);
  CHECK_THROWS_AS(classify_fade(0.0, 0.8, 0.05), DomainError);
  CHECK(to_string(FadeRegime::CaseII) == "CaseII");
}

TEST_CASE("default fade makes the mean increment odd in A") {
  const double omega = 0.8, eps = 0.05, gamma = 1.0, a = default_fade(omega, eps);
  for (double A = 0.0; A <= 2.5; A += 0.05) {
    const double up = activity_weight(A, gamma) * omega + eps - a;
    const double down = activity_weight(-A, gamma) * omega + eps - a;
    CHECK(up == Approx(-down).epsilon(1e-14));
  }
}

TEST_CASE("ModelParams validation names the violated field") {
  ModelParams p;
  CHECK_NOTHROW(p.validate());
  p.omega_p = 0.96;
  try {
    p.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("omega_p + eps_floor < 1") != std::string::npos);
  }
  ModelParams q;
  q.lambda_c = 1.0;
  CHECK_THROWS_AS(q.validate(), ConfigError);
  ModelParams r;
  r.eps_floor = 0.9;
  r.omega_p = 0.05;
  CHECK_THROWS_AS(r.validate(), ConfigError);
  ModelParams s;
  s.mu_l = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("nu ratios and quasi-invariant scaling") {
  ModelParams p;
  p.sigma2_p = 0.02;
  p.lambda_p = 0.5;
  CHECK(p.nu_p() == Approx(0.04));
  p.qi_scale = 0.01;
  const ModelParams s = p.scaled();
  CHECK(s.lambda_p == Approx(0.005));
  CHECK(s.sigma2_p == Approx(0.0002));
  CHECK(s.nu_p() == Approx(p.nu_p()));
  CHECK(s.omega_p == p.omega_p);
}

TEST_CASE("interaction kernels") {
  const InteractionKernels k = InteractionKernels::standard();
  CHECK(k.D(1.0) == 0.0);
  CHECK(k.D(-1.0) == 0.0);
  CHECK(k.D(0.0) == 1.0);
  CHECK(k.G(0.3, -0.8) == 1.0);
  const InteractionKernels b = InteractionKernels::bounded_confidence(0.5);
  gen::Gen g(13);
  for (int c = 0; c < 1000; ++c) {
    const double w = g.uniform(-1, 1), v = g.uniform(-1, 1);
    CHECK(b.G(w, v) == b.G(v, w));
    CHECK(b.G(w, v) >= 0.0);
    CHECK(b.G(w, v) <= 1.0);
  }
  CHECK(b.G(0.0, 0.6) == 0.0);
  CHECK(b.G(0.0, 0.25) == Approx(0.5));
  CHECK_THROWS_AS(InteractionKernels::bounded_confidence(0.0), ConfigError);
}

TEST_CASE("leader-inclusive activity channel sums the channels") {
  ModelParams p;
  const ActivityChannel c = activity_channel(p, Channels::Both);
  CHECK(c.omega == Approx(p.omega_p + p.omega_l));
  CHECK(c.eps == Approx(2 * p.eps_floor));
  CHECK(c.fade == Approx(p.a_p + p.a_l));
  const ActivityChannel a = activity_channel(p, Channels::Agents);
  CHECK(a.omega == p.omega_p);
}

// ---- micro ----

namespace {
InteractionDraw draw(bool on, double eta = 0.0) { return {on, eta}; }
}  // namespace

TEST_CASE("agent_agent_update compromise") {
  ModelParams p;
  p.lambda_p = 0.1;
  const auto k = InteractionKernels::standard();
  auto [a, b] = agent_agent_update({0.0, 0.0}, {1.0, 0.0}, p, k, draw(true), draw(true));
  CHECK(a.w == Approx(0.1).epsilon(1e-15));
  CHECK(b.w == Approx(0.9).epsilon(1e-15));
  auto [c, d] = agent_agent_update({0.2, 0.0}, {0.7, 0.0}, p, k, draw(false), draw(true));
  CHECK(c.w == 0.2);
  CHECK(d.w == 0.7);
}

TEST_CASE("agent_agent_update activity increments depend only on the own draw") {
  ModelParams p;
  p.lambda_A = 0.1;
  p.a_p = 0.45;
  const auto k = InteractionKernels::standard();
  auto [a, b] = agent_agent_update({0.1, 1.0}, {0.5, -2.0}, p, k, draw(true), draw(false));
  CHECK(a.A == Approx(1.0 + 0.1 * (1 - 0.45)));
  CHECK(b.A == Approx(-2.0 + 0.1 * (0 - 0.45)));
  auto [a2, b2] = agent_agent_update({-0.9, 1.0}, {0.95, -2.0}, p, k, draw(true), draw(false));
  CHECK(a2.A == a.A);
  CHECK(b2.A == b.A);
}

TEST_CASE("agent_agent_update conserves the pair mean for symmetric kernels") {
  gen::Gen g(21);
  const auto unit = InteractionKernels::standard();
  const auto bounded = InteractionKernels::bounded_confidence(0.7);
  for (int c = 0; c < 2000; ++c) {
    const ModelParams p = g.params();
    const AgentState a{g.uniform(-1, 1), g.uniform(-3, 3)}, b{g.uniform(-1, 1), g.uniform(-3, 3)};
    const bool on = g.coin();
    for (const auto* k : {&unit, &bounded}) {
      auto [x, y] = agent_agent_update(a, b, p, *k, draw(on), draw(on));
      CAPTURE(c);
      CHECK(x.w + y.w == Approx(a.w + b.w).epsilon(1e-14));
    }
  }
}

TEST_CASE("opinions stay in [-1,1] under bounded noise draws") {
  gen::Gen g(22);
  const auto k = InteractionKernels::standard();
  for (int c = 0; c < 5000; ++c) {
    ModelParams p = g.params();
    const AgentState a{g.uniform(-1, 1), 0.0}, b{g.uniform(-1, 1), 0.0};
    CounterRng rng(99, c, 0);
    const InteractionDraw da{g.coin(), sample_bounded_noise(a.w, p.sigma2_p, k, p.lambda_p, rng)};
    const InteractionDraw db{g.coin(), sample_bounded_noise(b.w, p.sigma2_p, k, p.lambda_p, rng)};
    auto [x, y] = agent_agent_update(a, b, p, k, da, db);
    CAPTURE(c);
    CHECK(std::abs(x.w) <= 1.0);
    CHECK(std::abs(y.w) <= 1.0);
    const double z = g.uniform(-1, 1);
    const InteractionDraw dl{g.coin(), sample_bounded_noise(a.w, p.sigma2_l, k, p.lambda_l, rng)};
    CHECK(std::abs(agent_leader_update(a, z, p, k, dl).w) <= 1.0);
  }
}

TEST_CASE("agent_agent_update rejects noise that leaves the interval") {
  ModelParams p;
  const auto k = InteractionKernels::standard();
  CHECK_THROWS_AS(agent_agent_update({0.9, 0}, {0.9, 0}, p, k, draw(false, 0.9), draw(false)), DomainError);
}

TEST_CASE("agent_leader_update") {
  ModelParams p;
  p.lambda_l = 0.2;
  p.lambda_A = 0.1;
  p.a_l = 0.45;
  const auto k = InteractionKernels::standard();
  const AgentState out = agent_leader_update({0.0, 0.3}, 0.5, p, k, draw(true));
  CHECK(out.w == Approx(0.1).epsilon(1e-15));
  CHECK(out.A == Approx(0.3 + 0.055).epsilon(1e-14));
  CHECK(agent_leader_update({0.4, 0.0}, 0.4, p, k, draw(true)).w == 0.4);
  CHECK(agent_leader_update({0.4, 0.0}, -0.4, p, k, draw(false)).w == 0.4);
}

TEST_CASE("controlled_activity_update") {
  CHECK(controlled_activity_update(1.0, 0.2) == Approx(0.9).epsilon(1e-15));
  CHECK(controlled_activity_update(0.0, 0.7) == 0.0);
  CHECK(controlled_activity_update(-2.0, 0.2) == Approx(-1.8).epsilon(1e-15));
  gen::Gen g(23);
  for (int c = 0; c < 1000; ++c) {
    const double A = g.uniform(-10, 10), lc = g.uniform(0.001, 0.999);
    CHECK(std::abs(controlled_activity_update(A, lc)) <= (1 - lc / 2) * std::abs(A) + 1e-15);
  }
}

TEST_CASE("expected_activity_increment sign pattern") {
  ModelParams p;  // CaseII: a_p = 0.45 in (0.05, 0.85)
  CHECK(expected_activity_increment(2.0, p, ActivitySource::Agent) > 0.0);
  CHECK(expected_activity_increment(-2.0, p, ActivitySource::Agent) < 0.0);
  CHECK(expected_activity_increment(0.0, p, ActivitySource::Agent) == Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(expected_activity_increment(2.0, p, ActivitySource::Agent) == Approx(0.1 * (0.85 - 0.45)));
  CHECK(expected_activity_increment(2.0, p, ActivitySource::Leader) == Approx(0.1 * (0.8 - 0.425)));
  ModelParams low = p;
  low.a_p = 0.02;  // CaseI
  CHECK(expected_activity_increment(-2.0, low, ActivitySource::Agent) > 0.0);
  ModelParams high = p;
  high.a_p = 0.9;  // CaseIII
  CHECK(expected_activity_increment(2.0, high, ActivitySource::Agent) < 0.0);
}

TEST_CASE("sample_bounded_noise moments") {
  const auto k = InteractionKernels::standard();
  const double sigma2 = 0.05;
  const long n = 1000000;
  double s = 0, s2 = 0;
  for (long i = 0; i < n; ++i) {
    CounterRng rng(7, 0, static_cast<std::uint64_t>(i));
    const double eta = sample_bounded_noise(0.0, sigma2, k, 0.5, rng);
    s += eta;
    s2 += eta * eta;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(var / n));
  CHECK(std::abs(var - sigma2) <= 0.05 * sigma2);
}

TEST_CASE("sample_bounded_noise vanishes at the endpoints and respects the bound") {
  const auto k = InteractionKernels::standard();
  gen::Gen g(24);
  for (int c = 0; c < 5000; ++c) {
    CounterRng rng(5, c, 1);
    const double w = c == 0 ? 1.0 : (c == 1 ? -1.0 : g.uniform(-1, 1));
    const double rate = g.uniform(0.0, 0.99);
    const double eta = sample_bounded_noise(w, 0.2, k, rate, rng);
    CHECK(std::abs(k.D(w) * eta) <= noise_bound(w, rate) + 1e-15);
    if (std::abs(w) == 1.0) CHECK(k.D(w) * eta == 0.0);
  }
}

TEST_CASE("counter rng is a pure function of its key") {
  CounterRng a(1, 2, 3), b(1, 2, 3), c(1, 2, 4);
  const auto x = a(), y = b(), z = c();
  CHECK(x == y);
  CHECK(x != z);
  CounterRng r(9, 9, 9);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    CHECK(r.below(7) < 7u);
  }
}
