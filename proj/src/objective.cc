#include "mcqsgd/objective.h"

#include <cmath>
#include <string>

namespace mcqsgd {

void CostConfig::validate() const {
  if (t_max < 1) throw std::invalid_argument("CostConfig: t_max must be >= 1");
  if (!(step_cost > 0.0) || !std::isfinite(step_cost)) {
    throw std::invalid_argument("CostConfig: step_cost must be finite and > 0");
  }
}

namespace internal {

void check_start(const State& x0, const EnvParams& env) {
  if (!in_box(x0, env)) {
    throw std::invalid_argument("rollout: initial state outside box " + to_string(x0));
  }
}

}  // namespace internal

double gamma_bullet(const Theta& theta, std::span<const State> ics, const CostConfig& cc,
                    const EnvParams& env, TieBreak tie) {
  return gamma_bullet(UniformPolicy{theta, tie}, ics, cc, env);
}

double gamma(const Theta& theta, std::span<const State> ics, const CostConfig& cc,
             const EnvParams& env, TieBreak tie) {
  return gamma(UniformPolicy{theta, tie}, ics, cc, env);
}

PartitionedGamma gamma_partitioned_avg(const PartitionedTheta& pt,
                                       const std::array<std::span<const State>, 4>& per_region_ics,
                                       const CostConfig& cc, const RegionPartition& p,
                                       const EnvParams& env, TieBreak tie) {
  const PartitionedPolicy policy{pt, p, env, tie};
  PartitionedGamma out;
  double sum = 0.0;
  for (Region r : kAllRegions) {
    const auto ics = per_region_ics[region_slot(r)];
    for (std::size_t i = 0; i < ics.size(); ++i) {
      if (region_of(ics[i], p, env) != r) {
        throw std::invalid_argument("gamma_partitioned_avg: initial condition " +
                                    std::to_string(i) + " " + to_string(ics[i]) +
                                    " is not in region " + std::to_string(region_number(r)));
      }
    }
    const double g = gamma(policy, ics, cc, env);
    out.per_region[region_slot(r)] = g;
    sum += g;
  }
  out.average = sum / 4.0;
  return out;
}

}  // namespace mcqsgd
