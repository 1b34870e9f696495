#include "mcqsgd/probing.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mcqsgd {

void SinusoidMixture::validate() const {
  if (terms.empty()) throw std::invalid_argument("SinusoidMixture: needs at least one term");
  for (const auto& term : terms) {
    if (!std::isfinite(term.amplitude)) {
      throw std::invalid_argument("SinusoidMixture: non-finite amplitude");
    }
    if (!(term.frequency > 0.0) || !std::isfinite(term.frequency)) {
      throw std::invalid_argument("SinusoidMixture: frequencies must be finite and > 0");
    }
    if (!std::isfinite(term.phase)) throw std::invalid_argument("SinusoidMixture: non-finite phase");
  }
}

double SinusoidMixture::value(double t) const {
  double sum = 0.0;
  for (const auto& term : terms) {
    sum += term.amplitude * std::sin(2.0 * std::numbers::pi * (term.frequency * t + term.phase));
  }
  return sum;
}

double SinusoidMixture::amplitude_sum() const {
  double sum = 0.0;
  for (const auto& term : terms) sum += std::abs(term.amplitude);
  return sum;
}

void ProbingConfig::validate() const {
  if (dims.empty()) throw std::invalid_argument("ProbingConfig: needs at least one dimension");
  for (const auto& mixture : dims) mixture.validate();
}

Eigen::VectorXd probe_value(const ProbingConfig& pc, double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) {
    throw std::invalid_argument("probe_value: time must be finite and >= 0");
  }
  Eigen::VectorXd xi(pc.dimension());
  for (int j = 0; j < pc.dimension(); ++j) xi[j] = pc.dims[static_cast<std::size_t>(j)].value(t);
  return xi;
}

ProbingConfig sample_probing_config(Rng& rng, const ProbingSpec& spec) {
  if (spec.d < 1 || spec.terms() < 1) {
    throw std::invalid_argument("sample_probing_config: d and number of terms must be >= 1");
  }
  if (spec.phases.size() != spec.frequencies.size()) {
    throw std::invalid_argument("sample_probing_config: one phase per frequency required");
  }
  ProbingConfig pc;
  pc.clock_mode = spec.clock_mode;
  pc.dims.resize(static_cast<std::size_t>(spec.d));
  for (auto& mixture : pc.dims) {
    for (int i = 0; i < spec.terms(); ++i) {
      const auto k = static_cast<std::size_t>(i);
      mixture.terms.push_back({uniform_open01(rng), spec.frequencies[k], spec.phases[k]});
    }
  }
  pc.validate();
  return pc;
}

ProbingConfig sample_probing_config(std::uint64_t seed, const ProbingSpec& spec) {
  Rng rng(seed);
  return sample_probing_config(rng, spec);
}

}  // namespace mcqsgd
