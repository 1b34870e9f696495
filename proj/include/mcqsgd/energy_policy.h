#pragma once

// Energy-based feedback for the Mountain Car.
//
// With KE = m v^2 / 2 and PE = m g sin(z) / 3, the Lyapunov candidate
// J = E^2 / 2 yields the closed-form feedback u = -(k/R) v E. The trainable
// family keeps the two monomials of that law and saturates through sign():
//
//   phi_theta(s) = sign(theta1 v^3 + theta2 v sin(z)).

#include <array>

#include "mcqsgd/env.h"

namespace mcqsgd {

struct EnergyParams {
  double m = 1.0;
  double k = 1e-3;
  double g = 2.5e-3;
  double R = 1.0;

  void validate() const;

  bool operator==(const EnergyParams&) const = default;
};

struct Theta {
  double theta1 = 0.0;
  double theta2 = 0.0;

  bool operator==(const Theta&) const = default;
  Theta operator-() const { return {-theta1, -theta2}; }
  friend Theta operator*(double c, const Theta& t) { return {c * t.theta1, c * t.theta2}; }
};

bool is_finite(const Theta& t);

/// Value returned by policy_action when the switching function is exactly 0.
enum class TieBreak { kZero, kPositive, kNegative };

double total_energy(const State& s, const EnergyParams& ep = {});
double lyapunov_value(const State& s, const EnergyParams& ep = {});

/// Unconstrained closed-form feedback -(km/2R) v^3 - (kmg/3R) v sin(z).
double analytic_feedback(const State& s, const EnergyParams& ep = {});

/// analytic_feedback clipped to [-1, 1], usable as a rollout baseline.
double analytic_feedback_clamped(const State& s, const EnergyParams& ep = {});

/// The Theta whose sign policy reproduces sign(analytic_feedback).
Theta analytic_theta(const EnergyParams& ep = {});

double switching_value(const Theta& theta, const State& s);

/// Returns -1, 0 or +1.
double policy_action(const Theta& theta, const State& s, TieBreak tie = TieBreak::kZero);

// Continuous-time model used only to check the Lyapunov derivation:
//   dz/dt = v,  dv/dt = (k/m) u - g sin(pi + slope_wavenumber z).
std::array<double, 2> continuous_rhs(const State& s, double u, const EnergyParams& ep = {},
                                     double slope_wavenumber = 3.0);

/// dJ/dt along the continuous model, obtained by substituting the model into
/// dJ/dt = E (m v dv/dt + (m g / 3) cos(z) dz/dt):
///   m g v E [cos(z)/3 - sin(pi + 3z)] + k v E u.
double lyapunov_rate(const State& s, double u, const EnergyParams& ep = {},
                     double slope_wavenumber = 3.0);

}  // namespace mcqsgd
