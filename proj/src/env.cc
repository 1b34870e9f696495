#include "mcqsgd/env.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mcqsgd {

void EnvParams::validate() const {
  const bool finite = std::isfinite(z_min) && std::isfinite(z_goal) &&
                      std::isfinite(v_min) && std::isfinite(v_max) &&
                      std::isfinite(force_gain) && std::isfinite(gravity_gain) &&
                      std::isfinite(slope_wavenumber);
  if (!finite) throw std::invalid_argument("EnvParams: non-finite field");
  if (!(z_min < z_goal)) throw std::invalid_argument("EnvParams: need z_min < z_goal");
  if (!(v_min < 0.0 && 0.0 < v_max)) {
    throw std::invalid_argument("EnvParams: need v_min < 0 < v_max");
  }
  if (!(force_gain > 0.0)) throw std::invalid_argument("EnvParams: force_gain must be > 0");
  if (!(gravity_gain > 0.0)) throw std::invalid_argument("EnvParams: gravity_gain must be > 0");
}

bool is_finite(const State& s) { return std::isfinite(s.z) && std::isfinite(s.v); }

bool in_box(const State& s, const EnvParams& p) {
  return is_finite(s) && s.z >= p.z_min && s.z <= p.z_goal && s.v >= p.v_min &&
         s.v <= p.v_max;
}

StepOutcome step(const State& s, double u, const EnvParams& p) {
  if (!(u >= -1.0 && u <= 1.0)) {
    throw std::invalid_argument("step: control outside [-1, 1]: " + std::to_string(u));
  }
  if (!is_finite(s)) throw std::invalid_argument("step: non-finite state " + to_string(s));

  const double raw_z = s.z + s.v;
  const double raw_v =
      s.v + p.force_gain * u - p.gravity_gain * std::cos(p.slope_wavenumber * s.z);

  StepOutcome out;
  out.reached_goal = raw_z >= p.z_goal;
  out.next.z = std::clamp(raw_z, p.z_min, p.z_goal);
  out.next.v = std::clamp(raw_v, p.v_min, p.v_max);
  if (out.next.z == p.z_min && out.next.v < 0.0) {
    out.next.v = 0.0;
    out.wall_reset = true;
  }
  return out;
}

std::string to_string(const State& s) {
  std::ostringstream os;
  os.precision(17);
  os << "(z=" << s.z << ", v=" << s.v << ")";
  return os.str();
}

}  // namespace mcqsgd
