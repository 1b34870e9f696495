#pragma once

// Minimum-time cost signals. Every non-goal step costs step_cost; entering the
// goal ends the episode. Episodes are cut at t_max steps.

#include <algorithm>
#include <array>
#include <concepts>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcqsgd/energy_policy.h"
#include "mcqsgd/env.h"
#include "mcqsgd/partition.h"

namespace mcqsgd {

struct CostConfig {
  int t_max = 500;
  double step_cost = 1.0;

  void validate() const;
  /// Gamma is capped at t_max itself, matching min(Gamma-bullet, T_max).
  double cap() const { return static_cast<double>(t_max); }

  bool operator==(const CostConfig&) const = default;
};

struct EpisodeResult {
  int steps = 0;
  bool reached_goal = false;
  std::optional<std::vector<State>> trajectory;
  std::optional<std::vector<double>> controls;

  bool operator==(const EpisodeResult&) const = default;
};

template <typename P>
concept StatePolicy = std::invocable<const P&, const State&> &&
                      std::convertible_to<std::invoke_result_t<const P&, const State&>, double>;

using PolicyFn = std::function<double(const State&)>;

struct UniformPolicy {
  Theta theta;
  TieBreak tie = TieBreak::kZero;

  double operator()(const State& s) const { return policy_action(theta, s, tie); }
};

struct PartitionedPolicy {
  PartitionedTheta thetas;
  RegionPartition partition;
  EnvParams env;
  TieBreak tie = TieBreak::kZero;

  double operator()(const State& s) const {
    return partitioned_action(thetas, s, partition, env, tie);
  }
};

namespace internal {
void check_start(const State& x0, const EnvParams& env);
}  // namespace internal

/// Runs the policy from x0 until the goal is entered or t_max steps elapse.
/// `steps` counts the transitions executed.
template <StatePolicy P>
EpisodeResult rollout(const P& policy, const State& x0, const CostConfig& cc = {},
                      const EnvParams& env = {}, bool record = false) {
  internal::check_start(x0, env);
  EpisodeResult r;
  if (record) {
    r.trajectory.emplace();
    r.controls.emplace();
    r.trajectory->push_back(x0);
  }
  if (x0.z >= env.z_goal) {
    r.reached_goal = true;
    return r;
  }
  State s = x0;
  while (r.steps < cc.t_max) {
    const double u = policy(s);
    const StepOutcome out = step(s, u, env);
    ++r.steps;
    s = out.next;
    if (record) {
      r.controls->push_back(u);
      r.trajectory->push_back(s);
    }
    if (out.reached_goal) {
      r.reached_goal = true;
      break;
    }
  }
  return r;
}

template <StatePolicy P>
double cost_to_go(const P& policy, const State& x0, const CostConfig& cc = {},
                  const EnvParams& env = {}) {
  return cc.step_cost * rollout(policy, x0, cc, env).steps;
}

/// Mean cost-to-go over the initial conditions (uncapped).
template <StatePolicy P>
double gamma_bullet(const P& policy, std::span<const State> ics, const CostConfig& cc = {},
                    const EnvParams& env = {}) {
  if (ics.empty()) throw std::invalid_argument("gamma_bullet: empty initial-condition set");
  double sum = 0.0;
  for (const State& x0 : ics) sum += cost_to_go(policy, x0, cc, env);
  return sum / static_cast<double>(ics.size());
}

/// min(gamma_bullet, t_max).
template <StatePolicy P>
double gamma(const P& policy, std::span<const State> ics, const CostConfig& cc = {},
             const EnvParams& env = {}) {
  return std::min(gamma_bullet(policy, ics, cc, env), cc.cap());
}

double gamma_bullet(const Theta& theta, std::span<const State> ics, const CostConfig& cc = {},
                    const EnvParams& env = {}, TieBreak tie = TieBreak::kZero);
double gamma(const Theta& theta, std::span<const State> ics, const CostConfig& cc = {},
             const EnvParams& env = {}, TieBreak tie = TieBreak::kZero);

struct PartitionedGamma {
  std::array<double, 4> per_region{};
  double average = 0.0;
};

/// Rolls the full partitioned policy out from each region's initial conditions.
/// Throws std::invalid_argument if a set is empty or holds a state of another
/// region.
PartitionedGamma gamma_partitioned_avg(const PartitionedTheta& pt,
                                       const std::array<std::span<const State>, 4>& per_region_ics,
                                       const CostConfig& cc = {}, const RegionPartition& p = {},
                                       const EnvParams& env = {}, TieBreak tie = TieBreak::kZero);

}  // namespace mcqsgd
