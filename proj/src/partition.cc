#include "mcqsgd/partition.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mcqsgd {

Region region_from_number(int n) {
  if (n < 1 || n > 4) throw std::invalid_argument("region must be in 1..4, got " + std::to_string(n));
  return static_cast<Region>(n);
}

void RegionPartition::validate(const EnvParams& env) const {
  if (!(std::isfinite(z_split) && env.z_min < z_split && z_split < env.z_goal)) {
    throw std::invalid_argument("RegionPartition: need z_min < z_split < z_goal");
  }
  if (!(std::isfinite(v_split) && env.v_min < v_split && v_split < env.v_max)) {
    throw std::invalid_argument("RegionPartition: need v_min < v_split < v_max");
  }
}

RegionBox region_box(Region r, const RegionPartition& p, const EnvParams& env) {
  switch (r) {
    case Region::k1:
      return {p.z_split, env.z_goal, p.v_split, env.v_max};
    case Region::k2:
      return {env.z_min, p.z_split, p.v_split, env.v_max};
    case Region::k3:
      return {env.z_min, p.z_split, env.v_min, p.v_split};
    case Region::k4:
      return {p.z_split, env.z_goal, env.v_min, p.v_split};
  }
  throw std::invalid_argument("region_box: bad region");
}

Region region_of(const State& s, const RegionPartition& p, const EnvParams& env) {
  if (!in_box(s, env)) throw std::invalid_argument("region_of: state outside box " + to_string(s));
  const bool right = s.z >= p.z_split;
  const bool up = s.v >= p.v_split;
  if (up) return right ? Region::k1 : Region::k2;
  return right ? Region::k4 : Region::k3;
}

double partitioned_action(const PartitionedTheta& pt, const State& s, const RegionPartition& p,
                          const EnvParams& env, TieBreak tie) {
  return policy_action(pt[region_of(s, p, env)], s, tie);
}

}  // namespace mcqsgd
