// Command-line driver for the Mountain Car qSGD experiments.
//
// Exit codes: 0 success, 1 usage or validation error, 2 runtime failure.
// `compare` additionally returns 3 when the uniform report has the lower mean.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mcqsgd/experiment.h"
#include "mcqsgd/persist.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mcqsgd;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;
constexpr int kExitUniformWins = 3;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<std::uint64_t> env_seed() {
  const char* s = std::getenv("QSA_SEED");
  if (s == nullptr || *s == '\0') return std::nullopt;
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != std::string(s).size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string("QSA_SEED is not an unsigned integer: '") + s + "'");
  }
}

// Precedence: --seed, then master_seed from the config file, then QSA_SEED.
ExperimentConfig resolve_config(const std::string& config_path, std::optional<std::uint64_t> seed,
                                std::optional<std::string> mode) {
  ExperimentConfig cfg;
  bool seed_from_file = false;
  if (!config_path.empty()) {
    if (!fs::exists(config_path)) throw UsageError("config file not found: " + config_path);
    try {
      const json j = read_json(config_path);
      cfg = config_from_json(j);
      seed_from_file = j.is_object() && j.contains("master_seed");
    } catch (const PersistError& e) {
      throw UsageError(e.what());
    }
  }
  if (seed) {
    cfg.master_seed = *seed;
  } else if (!seed_from_file) {
    if (auto s = env_seed()) cfg.master_seed = *s;
  }
  if (mode) {
    try {
      cfg.mode = parse_mode(*mode);
    } catch (const PersistError& e) {
      throw UsageError(e.what());
    }
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void print_resolved(const ExperimentConfig& cfg) {
  std::cout << "# resolved config\n" << to_json(cfg).dump(2) << "\n";
}

State parse_ic(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw UsageError("--ic expects 'z,v', got '" + text + "'");
  try {
    return {parse_double(text.substr(0, comma)), parse_double(text.substr(comma + 1))};
  } catch (const PersistError&) {
    throw UsageError("--ic expects 'z,v', got '" + text + "'");
  }
}

json episode_json(const EpisodeResult& e) {
  return {{"steps", e.steps}, {"reached_goal", e.reached_goal}};
}

int cmd_gen_ics(std::optional<std::uint64_t> seed, int count, const std::string& role,
                std::optional<int> region, const std::string& out) {
  const std::uint64_t s = seed ? *seed : env_seed().value_or(0);
  if (count < 1) throw UsageError("--count must be >= 1");
  const IcRole r = role == "train" ? IcRole::kTrain : IcRole::kTest;
  std::optional<Region> reg;
  if (region) reg = region_from_number(*region);
  const InitialConditionSet ics = generate_ics(s, count, r, reg);
  write_ics_csv(out, ics);
  json resolved = {{"seed", s}, {"count", count}, {"role", role}, {"out", out}};
  resolved["region"] = region ? json(*region) : json(nullptr);
  std::cout << "# resolved parameters\n" << resolved.dump(2) << "\n";
  return kExitOk;
}

int cmd_train(const ExperimentConfig& cfg, const fs::path& out) {
  print_resolved(cfg);
  fs::create_directories(out);
  write_json(out / "config.json", to_json(cfg));
  const InitialConditionSet tests = test_ics(cfg);
  json summary;
  summary["config"] = to_json(cfg);
  summary["probing"] = to_json(experiment_probing(cfg));
  summary["mode"] = mode_name(cfg.mode);

  if (cfg.mode == Mode::kUniform) {
    const UniformTraining t = train_uniform(cfg);
    write_theta_csv(out / "theta.csv", t.theta);
    write_trace_csv(out / "trace.csv", t.trace);
    write_ics_csv(out / "train_ics.csv", train_ics(cfg));
    const auto gen = generalization_test(UniformPolicy{t.theta, cfg.tie}, tests, cfg.cost, cfg.env, false);
    summary["theta0"] = to_json(t.theta0);
    summary["theta"] = to_json(t.theta);
    summary["gamma"] = t.final_gamma;
    summary["test_all_converged"] = gen.all_converged;
    std::cout << "final gamma " << t.final_gamma << "  theta (" << t.theta.theta1 << ", "
              << t.theta.theta2 << ")\n";
  } else {
    const PartitionedRun run = train_partitioned(cfg);
    write_theta_csv(out / "theta.csv", run.training.thetas);
    json per_region = json::array();
    for (Region r : kAllRegions) {
      const std::size_t k = region_slot(r);
      const std::string n = std::to_string(region_number(r));
      write_trace_csv(out / ("trace_region" + n + ".csv"), run.training.traces[k]);
      write_ics_csv(out / ("train_ics_region" + n + ".csv"), run.train_ics[k]);
      per_region.push_back(run.evaluation.per_region[k]);
    }
    const PartitionedPolicy policy{run.training.thetas, cfg.partition, cfg.env, cfg.tie};
    const auto gen = generalization_test(policy, tests, cfg.cost, cfg.env, false);
    json theta0 = json::array();
    for (const Theta& t : run.training.theta0) theta0.push_back(to_json(t));
    summary["theta0"] = theta0;
    summary["theta"] = to_json(run.training.thetas);
    summary["gamma_per_region"] = per_region;
    summary["gamma_bar"] = run.evaluation.average;
    summary["test_all_converged"] = gen.all_converged;
    std::cout << "final gamma_bar " << run.evaluation.average << "  per region";
    for (double g : run.evaluation.per_region) std::cout << ' ' << g;
    std::cout << "\n";
  }
  write_json(out / "summary.json", summary);
  return kExitOk;
}

int cmd_histogram(const ExperimentConfig& cfg, int jobs, const fs::path& out) {
  print_resolved(cfg);
  const HistogramReport rep = histogram_experiment(cfg, jobs);
  fs::create_directories(out);
  write_json(out / "report.json", report_to_json(rep));
  write_histogram_bins_csv(out / "bins.csv", rep);
  std::cout << "values " << rep.raw_values.size() << "  failures " << rep.failures << "  mean "
            << rep.summary.mean << "  min " << rep.summary.min << "  max " << rep.summary.max
            << "\n";
  return kExitOk;
}

int cmd_rollout(const ExperimentConfig& cfg, const std::string& theta_file,
                std::optional<std::uint64_t> random_theta, const std::vector<std::string>& ic_texts,
                const std::string& ic_file, bool record, const fs::path& out) {
  std::vector<State> ics;
  for (const auto& text : ic_texts) {
    const State s = parse_ic(text);
    if (!in_box(s, cfg.env)) throw UsageError("--ic outside the state box: " + text);
    ics.push_back(s);
  }
  if (!ic_file.empty()) {
    try {
      const auto set = read_ics_csv(ic_file, IcRole::kTest, cfg.env, cfg.partition);
      ics.insert(ics.end(), set.states.begin(), set.states.end());
    } catch (const PersistError& e) {
      throw UsageError(e.what());
    }
  }
  if (ics.empty()) throw UsageError("rollout needs --ic or --ic-file");

  PolicyFn policy;
  json described;
  if (!theta_file.empty()) {
    ThetaFile tf;
    try {
      tf = read_theta_csv(theta_file);
    } catch (const PersistError& e) {
      throw UsageError(e.what());
    }
    if (const auto* t = std::get_if<Theta>(&tf)) {
      policy = UniformPolicy{*t, cfg.tie};
      described = {{"kind", "uniform"}, {"theta", to_json(*t)}};
    } else {
      const auto& pt = std::get<PartitionedTheta>(tf);
      policy = PartitionedPolicy{pt, cfg.partition, cfg.env, cfg.tie};
      described = {{"kind", "partitioned"}, {"theta", to_json(pt)}};
    }
  } else {
    Rng rng(*random_theta);
    const double r = cfg.theta0_range;
    const double t1 = uniform(rng, -r, r);
    const double t2 = uniform(rng, -r, r);
    const Theta t{t1, t2};
    policy = UniformPolicy{t, cfg.tie};
    described = {{"kind", "random"}, {"seed", *random_theta}, {"theta", to_json(t)}};
  }
  std::cout << "# policy\n" << described.dump(2) << "\n";

  fs::create_directories(out);
  json episodes = json::array();
  for (std::size_t i = 0; i < ics.size(); ++i) {
    const EpisodeResult e = rollout(policy, ics[i], cfg.cost, cfg.env, record);
    if (record) write_trajectory_csv(out / ("trajectory_" + std::to_string(i) + ".csv"), e);
    json ej = episode_json(e);
    ej["z0"] = ics[i].z;
    ej["v0"] = ics[i].v;
    episodes.push_back(ej);
    std::cout << "episode " << i << " " << to_string(ics[i]) << "  steps " << e.steps
              << (e.reached_goal ? "  reached goal" : "  timed out") << "\n";
  }
  write_json(out / "episodes.json", {{"policy", described}, {"episodes", episodes}});
  return kExitOk;
}

json side_summary(const HistogramReport& rep, double threshold) {
  long below = 0;
  for (double x : rep.raw_values) below += x < threshold ? 1 : 0;
  const double n = static_cast<double>(rep.raw_values.size());
  return {{"mode", mode_name(rep.config.mode)},
          {"n", rep.raw_values.size()},
          {"mean", rep.summary.mean},
          {"modes", rep.summary.modes},
          {"mass_below_threshold", n > 0 ? static_cast<double>(below) / n : 0.0}};
}

int cmd_compare(const std::string& uniform_path, const std::string& partitioned_path,
                double threshold, const std::string& out) {
  HistogramReport uni, part;
  try {
    uni = report_from_json(read_json(uniform_path));
    part = report_from_json(read_json(partitioned_path));
  } catch (const PersistError& e) {
    throw UsageError(e.what());
  }
  if (uni.raw_values.empty() || part.raw_values.empty()) {
    throw UsageError("compare needs reports with at least one raw value");
  }
  const json u = side_summary(uni, threshold);
  const json p = side_summary(part, threshold);
  const double diff = part.summary.mean - uni.summary.mean;
  std::string verdict = "tie";
  if (diff < 0.0) verdict = "partitioned";
  if (diff > 0.0) verdict = "uniform";
  const json result = {{"threshold", threshold},
                       {"uniform", u},
                       {"partitioned", p},
                       {"mean_difference", diff},
                       {"mass_below_difference",
                        p["mass_below_threshold"].get<double>() -
                            u["mass_below_threshold"].get<double>()},
                       {"verdict", verdict}};
  if (!out.empty()) write_json(out, result);
  std::cout << result.dump(2) << "\n";
  return diff <= 0.0 ? kExitOk : kExitUniformWins;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-stochastic gradient descent for Mountain Car feedback policies"};
  app.require_subcommand(1, 1);
  int jobs = 1;
  app.add_option("--jobs", jobs, "Worker threads for restart studies")->check(CLI::PositiveNumber);

  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  std::string config_path, out;

  auto* gen = app.add_subcommand("gen-ics", "Generate an initial-condition CSV");
  int count = 80;
  std::string role = "train";
  std::optional<int> region;
  gen->add_option("--seed", seed, "Sampling seed (falls back to QSA_SEED)");
  gen->add_option("--count", count, "Number of states")->check(CLI::PositiveNumber);
  gen->add_option("--role", role, "train or test")->check(CLI::IsMember({"train", "test"}));
  gen->add_option("--region", region, "Restrict to region 1..4")->check(CLI::Range(1, 4));
  gen->add_option("--out", out, "Output CSV")->required();

  auto* train = app.add_subcommand("train", "Train a uniform or partitioned policy");
  train->add_option("--mode", mode, "uniform or partitioned")
      ->check(CLI::IsMember({"uniform", "partitioned"}));
  train->add_option("--config", config_path, "JSON experiment config");
  train->add_option("--seed", seed, "Master seed");
  train->add_option("--out", out, "Output directory")->required();

  auto* hist = app.add_subcommand("histogram", "Multi-restart final-cost histogram");
  std::optional<int> restarts;
  hist->add_option("--mode", mode, "uniform or partitioned")
      ->check(CLI::IsMember({"uniform", "partitioned"}));
  hist->add_option("--config", config_path, "JSON experiment config");
  hist->add_option("--restarts", restarts, "Total restarts (split over 4 regions if partitioned)")
      ->check(CLI::PositiveNumber);
  hist->add_option("--seed", seed, "Master seed");
  hist->add_option("--out", out, "Output directory")->required();

  auto* roll = app.add_subcommand("rollout", "Closed-loop episodes from given initial states");
  std::string theta_file, ic_file;
  std::optional<std::uint64_t> random_theta;
  std::vector<std::string> ic_texts;
  bool record = false;
  auto* theta_opt = roll->add_option("--theta-file", theta_file, "Theta CSV")->check(CLI::ExistingFile);
  auto* rand_opt = roll->add_option("--random-theta", random_theta, "Seed for a random theta");
  theta_opt->excludes(rand_opt);
  roll->add_option("--ic", ic_texts, "Initial state 'z,v' (repeatable)")->allow_extra_args(false);
  roll->add_option("--ic-file", ic_file, "Initial-condition CSV");
  roll->add_flag("--record", record, "Write per-episode trajectory CSVs");
  roll->add_option("--config", config_path, "JSON experiment config");
  roll->add_option("--out", out, "Output directory")->required();

  auto* cmp = app.add_subcommand("compare", "Compare uniform and partitioned histogram reports");
  std::string uniform_report, partitioned_report;
  double threshold = 46.0;
  cmp->add_option("--uniform-report", uniform_report)->required();
  cmp->add_option("--partitioned-report", partitioned_report)->required();
  cmp->add_option("--threshold", threshold, "Mass-below threshold");
  cmp->add_option("--out", out, "Output JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_ics(seed, count, role, region, out);
    if (train->parsed()) return cmd_train(resolve_config(config_path, seed, mode), out);
    if (hist->parsed()) {
      ExperimentConfig base = resolve_config(config_path, seed, mode);
      if (restarts) {
        base.n_restarts = *restarts;
        try {
          base.validate();
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      }
      return cmd_histogram(base, jobs, out);
    }
    if (roll->parsed()) {
      if (theta_file.empty() && !random_theta) {
        throw UsageError("rollout needs --theta-file or --random-theta");
      }
      return cmd_rollout(resolve_config(config_path, std::nullopt, std::nullopt), theta_file,
                         random_theta, ic_texts, ic_file, record, out);
    }
    if (cmp->parsed()) return cmd_compare(uniform_report, partitioned_report, threshold, out);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "runtime failure: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
