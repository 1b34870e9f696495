#pragma once

// Training and evaluation drivers for the uniform and partitioned policy
// studies.
//
// Every random quantity is drawn from a generator seeded by
// derive_seed(master_seed, stream, index):
//   train ICs        kTrainIcs, index 0 (uniform) or region number 1..4
//   test ICs         kTestIcs,  index 0
//   probe amplitudes kProbing,  index 0
//   theta0 pool      kTheta0,   index i in [0, n_restarts)
// Uniform restart i starts from pool entry i. In partitioned mode the same
// pool is split into 4 consecutive blocks, so region r, restart j starts from
// entry (r - 1) * n_restarts / 4 + j. Both modes therefore consume the same
// theta0 values under a given master seed.

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mcqsgd/energy_policy.h"
#include "mcqsgd/env.h"
#include "mcqsgd/objective.h"
#include "mcqsgd/partition.h"
#include "mcqsgd/probing.h"
#include "mcqsgd/qsgd.h"
#include "mcqsgd/rng.h"

namespace mcqsgd {

enum class Mode { kUniform, kPartitioned };
enum class IcRole { kTrain, kTest };

struct ExperimentConfig {
  Mode mode = Mode::kUniform;
  std::uint64_t master_seed = 0;
  /// Total count; partitioned mode gives each region a quarter.
  int n_train_ics = 80;
  int n_test_ics = 50;
  /// Total count; partitioned mode gives each region a quarter.
  int n_restarts = 800;
  /// theta0 components are drawn from unif([-theta0_range, theta0_range]).
  double theta0_range = 1.0;
  QsgdConfig qsgd;
  CostConfig cost;
  EnvParams env;
  RegionPartition partition;
  ProbingSpec probing;
  TieBreak tie = TieBreak::kZero;

  void validate() const;
  int train_ics_per_region() const { return n_train_ics / 4; }
  int restarts_per_region() const { return n_restarts / 4; }

  bool operator==(const ExperimentConfig&) const = default;
};

struct InitialConditionSet {
  std::vector<State> states;
  IcRole role = IcRole::kTrain;
  std::optional<std::vector<Region>> regions;

  /// Throws std::invalid_argument naming the first offending row.
  void validate(const EnvParams& env = {}, const RegionPartition& p = {}) const;

  bool operator==(const InitialConditionSet&) const = default;
};

/// Uniform over the box, or over the sub-box of `region` (then every state is
/// tagged). Goal-position starts are never produced.
InitialConditionSet generate_ics(std::uint64_t seed, int count, IcRole role,
                                 std::optional<Region> region = std::nullopt,
                                 const EnvParams& env = {}, const RegionPartition& p = {});

// Seeded inputs of an experiment, reproducible from the config alone.
InitialConditionSet train_ics(const ExperimentConfig& cfg);
InitialConditionSet region_train_ics(const ExperimentConfig& cfg, Region r);
InitialConditionSet test_ics(const ExperimentConfig& cfg);
ProbingConfig experiment_probing(const ExperimentConfig& cfg);
Theta theta0_from_pool(const ExperimentConfig& cfg, int pool_index);

Eigen::VectorXd to_vector(const Theta& t);
Theta to_theta(const Eigen::VectorXd& v);

struct UniformTraining {
  Theta theta0;
  Theta theta;
  QsgdTrace trace;
  /// Gamma of the final theta on the training set.
  double final_gamma = 0.0;
};

UniformTraining train_uniform(const ExperimentConfig& cfg, std::span<const State> ics,
                              const Theta& theta0, const ProbingConfig& pc);
/// Seeded run: training set train_ics(cfg), theta0 pool entry 0.
UniformTraining train_uniform(const ExperimentConfig& cfg);

struct PartitionedTraining {
  std::array<Theta, 4> theta0{};
  PartitionedTheta thetas;
  std::array<QsgdTrace, 4> traces;
};

/// Trains each region independently: region r's theta is applied everywhere
/// while rolling out from region r's initial conditions. QsgdError messages
/// are prefixed with the failing region.
PartitionedTraining train_partitioned(const ExperimentConfig& cfg,
                                      const std::array<std::span<const State>, 4>& per_region_ics,
                                      const std::array<Theta, 4>& theta0, const ProbingConfig& pc);

struct PartitionedRun {
  PartitionedTraining training;
  std::array<InitialConditionSet, 4> train_ics;
  /// Assembled policy evaluated on each region's training set.
  PartitionedGamma evaluation;
};

/// Seeded run: region_train_ics(cfg, r), theta0 pool entry of restart 0.
PartitionedRun train_partitioned(const ExperimentConfig& cfg);

struct HistogramSummary {
  double mean = 0.0;
  double min = 0.0;
  double max = 0.0;
  /// Lower edges of bins that are local maxima of the counts.
  std::vector<double> modes;

  bool operator==(const HistogramSummary&) const = default;
};

struct HistogramReport {
  ExperimentConfig config;
  std::vector<double> bin_edges;
  std::vector<long> counts;
  /// Final Gamma (uniform) or Gamma-bar (partitioned), in restart order.
  std::vector<double> raw_values;
  HistogramSummary summary;
  int failures = 0;
  std::vector<int> failed_restarts;

  bool operator==(const HistogramReport&) const = default;
};

/// Unit-width, integer-aligned bins spanning [floor(min) - 1, floor(max) + 2).
HistogramReport make_histogram(std::vector<double> raw_values);

/// `jobs` bounds the worker threads; the report does not depend on it.
HistogramReport histogram_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Calls fn(i) for i in [0, count) on up to `jobs` threads. Exceptions are
/// rethrown (lowest index first) after all workers finish.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

struct GeneralizationResult {
  std::vector<EpisodeResult> results;
  bool all_converged = true;
};

template <StatePolicy P>
GeneralizationResult generalization_test(const P& policy, const InitialConditionSet& ics,
                                         const CostConfig& cc = {}, const EnvParams& env = {},
                                         bool record = true) {
  GeneralizationResult out;
  out.results.reserve(ics.states.size());
  for (const State& x0 : ics.states) {
    out.results.push_back(rollout(policy, x0, cc, env, record));
    out.all_converged = out.all_converged && out.results.back().reached_goal;
  }
  return out;
}

}  // namespace mcqsgd
