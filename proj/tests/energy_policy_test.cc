#include "mcqsgd/energy_policy.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

namespace mcqsgd {
namespace {

// Frozen from a 30-digit evaluation of the closed forms at (z, v) = (-0.5, 0.05)
// with m = 1, k = 1e-3, g = 2.5e-3, R = 1.
constexpr double kEnergyAtRef = 8.5047871782983083e-4;
constexpr double kLyapunovAtRef = 3.6165702474073651e-7;
constexpr double kFeedbackAtRef = -4.2523935891491542e-8;

State random_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> z(-1.2, 0.5), v(-0.07, 0.07);
  return {z(rng), v(rng)};
}

TEST(EnergyTest, ZeroVelocityLeavesPotentialOnly) {
  const EnergyParams ep;
  for (double z : {-1.2, -0.5, 0.0, 0.3}) {
    EXPECT_DOUBLE_EQ(total_energy({z, 0.0}, ep), ep.g * std::sin(z) / 3.0);
  }
}

TEST(EnergyTest, ReferenceValues) {
  EXPECT_DOUBLE_EQ(total_energy({0.0, 0.05}), 0.00125);
  EXPECT_NEAR(total_energy({-0.5, 0.05}), kEnergyAtRef, 1e-18);
  EXPECT_NEAR(lyapunov_value({-0.5, 0.05}), kLyapunovAtRef, 1e-20);
  EXPECT_NEAR(analytic_feedback({-0.5, 0.05}), kFeedbackAtRef, 1e-21);
}

TEST(EnergyTest, LyapunovIsNonNegativeAndZeroAtZeroEnergy) {
  EXPECT_EQ(lyapunov_value({0.0, 0.0}), 0.0);
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) EXPECT_GE(lyapunov_value(random_state(rng)), 0.0);
}

TEST(EnergyTest, FeedbackVanishesAtZeroVelocity) {
  for (double z : {-1.1, -0.4, 0.2}) EXPECT_EQ(analytic_feedback({z, 0.0}), 0.0);
}

TEST(EnergyTest, FeedbackEqualsScaledVelocityTimesEnergy) {
  const EnergyParams ep{2.0, 3e-3, 2.5e-3, 0.5};
  std::mt19937_64 rng(11);
  for (int i = 0; i < 10000; ++i) {
    const State s = random_state(rng);
    const double expected = -(ep.k / ep.R) * s.v * total_energy(s, ep);
    ASSERT_NEAR(analytic_feedback(s, ep), expected, 1e-12);
    // Relative to the size of the two monomials, which may cancel.
    const double scale = std::abs(ep.k * ep.m / (2 * ep.R) * s.v * s.v * s.v) +
                         std::abs(ep.k * ep.m * ep.g / (3 * ep.R) * s.v * std::sin(s.z));
    ASSERT_LE(std::abs(analytic_feedback(s, ep) - expected), 1e-14 * scale);
  }
}

TEST(EnergyTest, ClampedFeedbackStaysFeasible) {
  const EnergyParams ep{1.0, 1e3, 2.5e-3, 1.0};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 1000; ++i) {
    const double u = analytic_feedback_clamped(random_state(rng), ep);
    ASSERT_LE(std::abs(u), 1.0);
  }
}

TEST(EnergyParamsTest, Validation) {
  EXPECT_NO_THROW(EnergyParams{}.validate());
  EXPECT_THROW((EnergyParams{0.0, 1e-3, 2.5e-3, 1.0}.validate()), std::invalid_argument);
  EXPECT_THROW((EnergyParams{1.0, 1e-3, 2.5e-3, -1.0}.validate()), std::invalid_argument);
}

TEST(PolicyTest, ZeroVelocityGivesZeroControl) {
  for (const Theta t : {Theta{1, 0}, Theta{-3, 2}, Theta{0.5, 0.5}}) {
    EXPECT_EQ(policy_action(t, {-0.7, 0.0}), 0.0);
  }
}

TEST(PolicyTest, PureCubicTermFollowsVelocity) {
  EXPECT_EQ(policy_action({1.0, 0.0}, {-0.9, 0.01}), 1.0);
  EXPECT_EQ(policy_action({1.0, 0.0}, {0.3, 0.01}), 1.0);
  EXPECT_EQ(policy_action({1.0, 0.0}, {0.3, -0.01}), -1.0);
}

TEST(PolicyTest, TieBreakConventions) {
  EXPECT_EQ(policy_action({1, 1}, {0.1, 0.0}, TieBreak::kPositive), 1.0);
  EXPECT_EQ(policy_action({1, 1}, {0.1, 0.0}, TieBreak::kNegative), -1.0);
  EXPECT_EQ(policy_action({1, 1}, {0.1, 0.0}, TieBreak::kZero), 0.0);
}

TEST(PolicyTest, AnalyticThetaReproducesFeedbackSign) {
  const EnergyParams ep;
  const Theta t = analytic_theta(ep);
  std::mt19937_64 rng(5);
  int checked = 0;
  for (int i = 0; i < 10000; ++i) {
    const State s = random_state(rng);
    const double u = analytic_feedback(s, ep);
    if (u == 0.0) continue;
    ASSERT_EQ(policy_action(t, s), u > 0 ? 1.0 : -1.0) << to_string(s);
    ++checked;
  }
  EXPECT_GT(checked, 9900);
}

TEST(PolicyPropertyTest, ScaleInvarianceAntisymmetryAndRange) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> th(-5.0, 5.0), scale(1e-3, 1e3);
  for (int i = 0; i < 20000; ++i) {
    const Theta t{th(rng), th(rng)};
    const State s = random_state(rng);
    const double a = policy_action(t, s);
    ASSERT_TRUE(a == -1.0 || a == 0.0 || a == 1.0);
    ASSERT_EQ(policy_action(scale(rng) * t, s), a);
    ASSERT_EQ(policy_action(-t, s), -a);
  }
}

// Forward-Euler trajectory of the continuous model under a smooth control;
// returns the largest gap between the one-step finite difference of J and
// lyapunov_rate over t in [0, horizon].
double max_rate_error(double dt, double horizon) {
  const EnergyParams ep;
  State s{-0.5, 0.05};
  double worst = 0.0;
  const int n = static_cast<int>(std::lround(horizon / dt));
  for (int k = 0; k < n; ++k) {
    const double t = k * dt;
    const double u = std::sin(0.7 * t);
    const auto f = continuous_rhs(s, u, ep);
    const State next{s.z + dt * f[0], s.v + dt * f[1]};
    const double fd = (lyapunov_value(next, ep) - lyapunov_value(s, ep)) / dt;
    worst = std::max(worst, std::abs(fd - lyapunov_rate(s, u, ep)));
    s = next;
  }
  return worst;
}

TEST(LyapunovRateTest, FiniteDifferenceConvergesAtFirstOrder) {
  const double e1 = max_rate_error(1e-3, 20.0);
  const double e2 = max_rate_error(5e-4, 20.0);
  const double e3 = max_rate_error(2.5e-4, 20.0);
  EXPECT_GT(e1, 0.0);
  EXPECT_NEAR(e1 / e2, 2.0, 0.3);
  EXPECT_NEAR(e2 / e3, 2.0, 0.3);
}

TEST(LyapunovRateTest, ControlTermIsKVE) {
  const EnergyParams ep;
  const State s{-0.3, 0.02};
  const double du = lyapunov_rate(s, 1.0, ep) - lyapunov_rate(s, 0.0, ep);
  EXPECT_NEAR(du, ep.k * s.v * total_energy(s, ep), 1e-20);
}

}  // namespace
}  // namespace mcqsgd
