#include "mcqsgd/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <string>
#include <thread>

namespace mcqsgd {

void ExperimentConfig::validate() const {
  if (n_train_ics < 1 || n_test_ics < 1 || n_restarts < 1) {
    throw std::invalid_argument("ExperimentConfig: counts must be >= 1");
  }
  if (mode == Mode::kPartitioned) {
    if (n_train_ics % 4 != 0) {
      throw std::invalid_argument("ExperimentConfig: partitioned mode needs n_train_ics divisible by 4");
    }
    if (n_restarts % 4 != 0) {
      throw std::invalid_argument("ExperimentConfig: partitioned mode needs n_restarts divisible by 4");
    }
  }
  if (!(theta0_range > 0.0) || !std::isfinite(theta0_range)) {
    throw std::invalid_argument("ExperimentConfig: theta0_range must be > 0");
  }
  if (probing.d != 2) throw std::invalid_argument("ExperimentConfig: probing.d must be 2");
  qsgd.validate(2);
  cost.validate();
  env.validate();
  partition.validate(env);
}

void InitialConditionSet::validate(const EnvParams& env, const RegionPartition& p) const {
  if (regions && regions->size() != states.size()) {
    throw std::invalid_argument("InitialConditionSet: region tag count does not match state count");
  }
  for (std::size_t i = 0; i < states.size(); ++i) {
    const State& s = states[i];
    if (!in_box(s, env)) {
      throw std::invalid_argument("InitialConditionSet: row " + std::to_string(i) +
                                  " is outside the state box: " + to_string(s));
    }
    if (regions && region_of(s, p, env) != (*regions)[i]) {
      throw std::invalid_argument("InitialConditionSet: row " + std::to_string(i) + " " +
                                  to_string(s) + " is tagged region " +
                                  std::to_string(region_number((*regions)[i])) + " but lies in " +
                                  std::to_string(region_number(region_of(s, p, env))));
    }
  }
}

InitialConditionSet generate_ics(std::uint64_t seed, int count, IcRole role,
                                 std::optional<Region> region, const EnvParams& env,
                                 const RegionPartition& p) {
  if (count < 1) throw std::invalid_argument("generate_ics: count must be >= 1");
  RegionBox box{env.z_min, env.z_goal, env.v_min, env.v_max};
  if (region) box = region_box(*region, p, env);

  Rng rng(seed);
  InitialConditionSet set;
  set.role = role;
  set.states.reserve(static_cast<std::size_t>(count));
  if (region) set.regions.emplace();
  while (static_cast<int>(set.states.size()) < count) {
    const State s{uniform(rng, box.z_lo, box.z_hi), uniform(rng, box.v_lo, box.v_hi)};
    // Rounding can land exactly on an exclusive edge.
    if (s.z >= env.z_goal || !in_box(s, env)) continue;
    if (region && region_of(s, p, env) != *region) continue;
    set.states.push_back(s);
    if (region) set.regions->push_back(*region);
  }
  return set;
}

InitialConditionSet train_ics(const ExperimentConfig& cfg) {
  return generate_ics(derive_seed(cfg.master_seed, SeedStream::kTrainIcs, 0), cfg.n_train_ics,
                      IcRole::kTrain, std::nullopt, cfg.env, cfg.partition);
}

InitialConditionSet region_train_ics(const ExperimentConfig& cfg, Region r) {
  return generate_ics(
      derive_seed(cfg.master_seed, SeedStream::kTrainIcs, static_cast<std::uint64_t>(region_number(r))),
      cfg.train_ics_per_region(), IcRole::kTrain, r, cfg.env, cfg.partition);
}

InitialConditionSet test_ics(const ExperimentConfig& cfg) {
  return generate_ics(derive_seed(cfg.master_seed, SeedStream::kTestIcs, 0), cfg.n_test_ics,
                      IcRole::kTest, std::nullopt, cfg.env, cfg.partition);
}

ProbingConfig experiment_probing(const ExperimentConfig& cfg) {
  return sample_probing_config(derive_seed(cfg.master_seed, SeedStream::kProbing, 0), cfg.probing);
}

Theta theta0_from_pool(const ExperimentConfig& cfg, int pool_index) {
  if (pool_index < 0) throw std::invalid_argument("theta0_from_pool: negative index");
  Rng rng(derive_seed(cfg.master_seed, SeedStream::kTheta0, static_cast<std::uint64_t>(pool_index)));
  const double r = cfg.theta0_range;
  const double t1 = uniform(rng, -r, r);
  const double t2 = uniform(rng, -r, r);
  return {t1, t2};
}

Eigen::VectorXd to_vector(const Theta& t) {
  Eigen::VectorXd v(2);
  v << t.theta1, t.theta2;
  return v;
}

Theta to_theta(const Eigen::VectorXd& v) {
  if (v.size() != 2) throw std::invalid_argument("to_theta: expected a 2-vector");
  return {v[0], v[1]};
}

UniformTraining train_uniform(const ExperimentConfig& cfg, std::span<const State> ics,
                              const Theta& theta0, const ProbingConfig& pc) {
  const auto objective = [&](const Eigen::VectorXd& psi) {
    return gamma(to_theta(psi), ics, cfg.cost, cfg.env, cfg.tie);
  };
  QsgdResult r = run_qsgd(objective, to_vector(theta0), cfg.qsgd, pc);
  UniformTraining out;
  out.theta0 = theta0;
  out.theta = to_theta(r.theta);
  out.trace = std::move(r.trace);
  out.final_gamma = gamma(out.theta, ics, cfg.cost, cfg.env, cfg.tie);
  return out;
}

UniformTraining train_uniform(const ExperimentConfig& cfg) {
  cfg.validate();
  const InitialConditionSet ics = train_ics(cfg);
  return train_uniform(cfg, ics.states, theta0_from_pool(cfg, 0), experiment_probing(cfg));
}

PartitionedTraining train_partitioned(const ExperimentConfig& cfg,
                                      const std::array<std::span<const State>, 4>& per_region_ics,
                                      const std::array<Theta, 4>& theta0, const ProbingConfig& pc) {
  PartitionedTraining out;
  out.theta0 = theta0;
  for (Region r : kAllRegions) {
    const std::size_t k = region_slot(r);
    try {
      UniformTraining t = train_uniform(cfg, per_region_ics[k], theta0[k], pc);
      out.thetas[r] = t.theta;
      out.traces[k] = std::move(t.trace);
    } catch (const QsgdError& e) {
      throw QsgdError(e.iteration(),
                      "region " + std::to_string(region_number(r)) + ": " + e.what());
    }
  }
  return out;
}

PartitionedRun train_partitioned(const ExperimentConfig& cfg) {
  cfg.validate();
  PartitionedRun run;
  std::array<std::span<const State>, 4> spans;
  std::array<Theta, 4> theta0;
  for (Region r : kAllRegions) {
    const std::size_t k = region_slot(r);
    run.train_ics[k] = region_train_ics(cfg, r);
    spans[k] = run.train_ics[k].states;
    theta0[k] = theta0_from_pool(cfg, static_cast<int>(k) * cfg.restarts_per_region());
  }
  run.training = train_partitioned(cfg, spans, theta0, experiment_probing(cfg));
  run.evaluation = gamma_partitioned_avg(run.training.thetas, spans, cfg.cost, cfg.partition,
                                         cfg.env, cfg.tie);
  return run;
}

HistogramReport make_histogram(std::vector<double> raw_values) {
  HistogramReport rep;
  rep.raw_values = std::move(raw_values);
  const auto& raw = rep.raw_values;
  if (raw.empty()) return rep;

  const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
  rep.summary.min = *lo_it;
  rep.summary.max = *hi_it;
  double sum = 0.0;
  for (double x : raw) sum += x;
  rep.summary.mean = sum / static_cast<double>(raw.size());

  const double lo = std::floor(rep.summary.min) - 1.0;
  const double hi = std::floor(rep.summary.max) + 2.0;
  for (double e = lo; e <= hi; e += 1.0) rep.bin_edges.push_back(e);
  rep.counts.assign(rep.bin_edges.size() - 1, 0);
  for (double x : raw) {
    const auto bin = static_cast<std::size_t>(std::floor(x) - lo);
    ++rep.counts[bin];
  }

  const auto& c = rep.counts;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    const bool rises = i == 0 || c[i] > c[i - 1];
    // Walk a plateau so it yields a single mode.
    std::size_t j = i;
    while (j + 1 < c.size() && c[j + 1] == c[i]) ++j;
    const bool falls = j + 1 == c.size() || c[j + 1] < c[i];
    if (rises && falls) rep.summary.modes.push_back(rep.bin_edges[i]);
    i = j;
  }
  return rep;
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  if (count <= 0) return;
  const int workers = std::clamp(jobs, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

HistogramReport histogram_experiment(const ExperimentConfig& cfg, int jobs) {
  cfg.validate();
  const ProbingConfig pc = experiment_probing(cfg);
  std::vector<std::optional<double>> values;

  if (cfg.mode == Mode::kUniform) {
    const InitialConditionSet ics = train_ics(cfg);
    values.resize(static_cast<std::size_t>(cfg.n_restarts));
    parallel_for(cfg.n_restarts, jobs, [&](int i) {
      try {
        values[static_cast<std::size_t>(i)] =
            train_uniform(cfg, ics.states, theta0_from_pool(cfg, i), pc).final_gamma;
      } catch (const QsgdError&) {
        // Counted as a failure below.
      }
    });
  } else {
    const int per = cfg.restarts_per_region();
    std::array<InitialConditionSet, 4> sets;
    std::array<std::span<const State>, 4> spans;
    for (Region r : kAllRegions) {
      sets[region_slot(r)] = region_train_ics(cfg, r);
      spans[region_slot(r)] = sets[region_slot(r)].states;
    }
    values.resize(static_cast<std::size_t>(per));
    parallel_for(per, jobs, [&](int j) {
      std::array<Theta, 4> theta0;
      for (int k = 0; k < 4; ++k) theta0[static_cast<std::size_t>(k)] = theta0_from_pool(cfg, k * per + j);
      try {
        const PartitionedTraining t = train_partitioned(cfg, spans, theta0, pc);
        values[static_cast<std::size_t>(j)] =
            gamma_partitioned_avg(t.thetas, spans, cfg.cost, cfg.partition, cfg.env, cfg.tie)
                .average;
      } catch (const QsgdError&) {
      }
    });
  }

  std::vector<double> raw;
  std::vector<int> failed;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i]) {
      raw.push_back(*values[i]);
    } else {
      failed.push_back(static_cast<int>(i));
    }
  }
  HistogramReport rep = make_histogram(std::move(raw));
  rep.config = cfg;
  rep.failures = static_cast<int>(failed.size());
  rep.failed_restarts = std::move(failed);
  return rep;
}

}  // namespace mcqsgd
