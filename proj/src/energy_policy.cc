#include "mcqsgd/energy_policy.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcqsgd {

namespace {

void require_finite(const State& s, const char* where) {
  if (!is_finite(s)) throw std::invalid_argument(std::string(where) + ": non-finite state");
}

}  // namespace

void EnergyParams::validate() const {
  if (!(m > 0.0 && k > 0.0 && g > 0.0 && R > 0.0) || !std::isfinite(m) || !std::isfinite(k) ||
      !std::isfinite(g) || !std::isfinite(R)) {
    throw std::invalid_argument("EnergyParams: m, k, g, R must be finite and > 0");
  }
}

bool is_finite(const Theta& t) { return std::isfinite(t.theta1) && std::isfinite(t.theta2); }

double total_energy(const State& s, const EnergyParams& ep) {
  require_finite(s, "total_energy");
  return 0.5 * ep.m * s.v * s.v + ep.m * ep.g * std::sin(s.z) / 3.0;
}

double lyapunov_value(const State& s, const EnergyParams& ep) {
  const double e = total_energy(s, ep);
  return 0.5 * e * e;
}

double analytic_feedback(const State& s, const EnergyParams& ep) {
  require_finite(s, "analytic_feedback");
  const Theta t = analytic_theta(ep);
  return t.theta1 * s.v * s.v * s.v + t.theta2 * s.v * std::sin(s.z);
}

double analytic_feedback_clamped(const State& s, const EnergyParams& ep) {
  return std::clamp(analytic_feedback(s, ep), -1.0, 1.0);
}

Theta analytic_theta(const EnergyParams& ep) {
  return {-(ep.k * ep.m) / (2.0 * ep.R), -(ep.k * ep.m * ep.g) / (3.0 * ep.R)};
}

double switching_value(const Theta& theta, const State& s) {
  return theta.theta1 * s.v * s.v * s.v + theta.theta2 * s.v * std::sin(s.z);
}

double policy_action(const Theta& theta, const State& s, TieBreak tie) {
  const double a = switching_value(theta, s);
  if (a > 0.0) return 1.0;
  if (a < 0.0) return -1.0;
  switch (tie) {
    case TieBreak::kPositive:
      return 1.0;
    case TieBreak::kNegative:
      return -1.0;
    case TieBreak::kZero:
      break;
  }
  return 0.0;
}

std::array<double, 2> continuous_rhs(const State& s, double u, const EnergyParams& ep,
                                     double slope_wavenumber) {
  return {s.v, (ep.k / ep.m) * u - ep.g * std::sin(std::numbers::pi + slope_wavenumber * s.z)};
}

double lyapunov_rate(const State& s, double u, const EnergyParams& ep, double slope_wavenumber) {
  const double e = total_energy(s, ep);
  const double gravity =
      std::cos(s.z) / 3.0 - std::sin(std::numbers::pi + slope_wavenumber * s.z);
  return ep.m * ep.g * s.v * e * gravity + ep.k * s.v * e * u;
}

}  // namespace mcqsgd
