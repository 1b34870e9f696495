#pragma once

// Deterministic exploration signal: one sum of sinusoids per parameter
// dimension,
//
//   xi_j(t) = sum_i a_ij sin(2 pi (w_ij t + phi_ij)),
//
// with phase measured in cycles.

#include <vector>

#include <Eigen/Core>

#include "mcqsgd/rng.h"

namespace mcqsgd {

struct SinusoidTerm {
  double amplitude = 0.0;
  double frequency = 0.0;
  double phase = 0.0;

  bool operator==(const SinusoidTerm&) const = default;
};

struct SinusoidMixture {
  std::vector<SinusoidTerm> terms;

  void validate() const;
  double value(double t) const;
  double amplitude_sum() const;

  bool operator==(const SinusoidMixture&) const = default;
};

/// Maps iteration n to the time at which the probe is sampled.
///  kOdeTime:        t_0 = 0, t_{n+1} = t_n + a_{n+1} (Euler time of the
///                   parameter ODE).
///  kIterationIndex: t_n = n. Integer sampling aliases any integer-frequency
///                   term to zero; kept for ablations.
enum class ClockMode { kOdeTime, kIterationIndex };

struct ProbingConfig {
  std::vector<SinusoidMixture> dims;
  ClockMode clock_mode = ClockMode::kOdeTime;

  void validate() const;
  int dimension() const { return static_cast<int>(dims.size()); }

  bool operator==(const ProbingConfig&) const = default;
};

Eigen::VectorXd probe_value(const ProbingConfig& pc, double t);

struct ProbingSpec {
  int d = 2;
  std::vector<double> frequencies = {0.3, 50.0};
  std::vector<double> phases = {0.0, 0.0};
  ClockMode clock_mode = ClockMode::kOdeTime;

  int terms() const { return static_cast<int>(frequencies.size()); }

  bool operator==(const ProbingSpec&) const = default;
};

/// Draws every amplitude independently from unif(0, 1); frequencies and phases
/// are shared across dimensions and taken from `spec`.
ProbingConfig sample_probing_config(Rng& rng, const ProbingSpec& spec = {});
ProbingConfig sample_probing_config(std::uint64_t seed, const ProbingSpec& spec = {});

}  // namespace mcqsgd
