#pragma once

// Discrete-time Mountain Car transition map.
//
//   z' = z + v
//   v' = v + force_gain * u - gravity_gain * cos(slope_wavenumber * z)
//
// Both updates read the old state. The result is projected onto the state box
// by clamping each coordinate independently; a car pinned against the left
// wall with negative velocity has its velocity reset to zero, and any crossing
// of z_goal is absorbing.

#include <string>

namespace mcqsgd {

struct EnvParams {
  double z_min = -1.2;
  double z_goal = 0.5;
  double v_min = -0.07;
  double v_max = 0.07;
  double force_gain = 1e-3;
  double gravity_gain = 2.5e-3;
  double slope_wavenumber = 3.0;

  /// Throws std::invalid_argument if the box or gains are malformed.
  void validate() const;

  bool operator==(const EnvParams&) const = default;
};

struct State {
  double z = 0.0;
  double v = 0.0;

  bool operator==(const State&) const = default;
};

struct StepOutcome {
  State next;
  bool reached_goal = false;
  bool wall_reset = false;
};

bool in_box(const State& s, const EnvParams& p);
bool is_finite(const State& s);

/// Advances one step. Throws std::invalid_argument when |u| > 1, u is NaN,
/// or the state has non-finite components.
StepOutcome step(const State& s, double u, const EnvParams& p = {});

std::string to_string(const State& s);

}  // namespace mcqsgd
