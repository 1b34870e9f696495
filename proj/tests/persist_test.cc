#include "mcqsgd/persist.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <gtest/gtest.h>

namespace mcqsgd {
namespace {

namespace fs = std::filesystem;

class PersistTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("mcqsgd_persist_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path file(const std::string& name) const { return dir_ / name; }
  void write_text(const std::string& name, const std::string& text) const {
    std::ofstream(file(name)) << text;
  }

  fs::path dir_;
};

TEST(FormatDoubleTest, ShortestRoundTrip) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> d(-1e3, 1e3);
  for (int i = 0; i < 10000; ++i) {
    const double x = d(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
    ASSERT_EQ(parse_double(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(500), "500");
  EXPECT_THROW(parse_double("1.5x"), PersistError);
  EXPECT_THROW(parse_double(""), PersistError);
}

TEST_F(PersistTest, IcRoundTripIsBitExact) {
  const InitialConditionSet ics = generate_ics(31, 80, IcRole::kTrain);
  write_ics_csv(file("ics.csv"), ics);
  EXPECT_EQ(read_ics_csv(file("ics.csv")), ics);

  const InitialConditionSet tagged = generate_ics(32, 20, IcRole::kTrain, Region::k4);
  write_ics_csv(file("r4.csv"), tagged);
  EXPECT_EQ(read_ics_csv(file("r4.csv")), tagged);

  const InitialConditionSet test = generate_ics(33, 50, IcRole::kTest);
  write_ics_csv(file("test.csv"), test);
  EXPECT_EQ(read_ics_csv(file("test.csv"), IcRole::kTest), test);
}

TEST_F(PersistTest, OutOfBoxIcNamesRow) {
  write_text("bad.csv", "z,v\n-0.5,0.0\n0.1,0.01\n-0.3,0.5\n");
  try {
    read_ics_csv(file("bad.csv"));
    FAIL();
  } catch (const PersistError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST_F(PersistTest, MalformedIcFiles) {
  write_text("hdr.csv", "x,y\n0,0\n");
  EXPECT_THROW(read_ics_csv(file("hdr.csv")), PersistError);
  write_text("num.csv", "z,v\nabc,0\n");
  EXPECT_THROW(read_ics_csv(file("num.csv")), PersistError);
  write_text("cols.csv", "z,v\n0.1\n");
  EXPECT_THROW(read_ics_csv(file("cols.csv")), PersistError);
  write_text("region.csv", "z,v,region\n0.1,0.01,3\n");
  EXPECT_THROW(read_ics_csv(file("region.csv")), PersistError);
  write_text("empty.csv", "");
  EXPECT_THROW(read_ics_csv(file("empty.csv")), PersistError);
  EXPECT_THROW(read_ics_csv(file("missing.csv")), PersistError);
}

TEST_F(PersistTest, ThetaRoundTrip) {
  const Theta t{-0.123456789012345678, 3.0e-7};
  write_theta_csv(file("u.csv"), t);
  EXPECT_EQ(std::get<Theta>(read_theta_csv(file("u.csv"))), t);

  const PartitionedTheta pt{{Theta{1.0 / 3, -2.0}, Theta{0.1, 0.2}, Theta{-7.5, 1e-12}, Theta{4, 4}}};
  write_theta_csv(file("p.csv"), pt);
  EXPECT_EQ(std::get<PartitionedTheta>(read_theta_csv(file("p.csv"))), pt);

  write_text("dup.csv", "region,theta1,theta2\n1,0,0\n1,0,0\n3,0,0\n4,0,0\n");
  EXPECT_THROW(read_theta_csv(file("dup.csv")), PersistError);
  write_text("nan.csv", "theta1,theta2\nnan,0\n");
  EXPECT_THROW(read_theta_csv(file("nan.csv")), PersistError);
}

TEST_F(PersistTest, TraceRoundTrip) {
  ExperimentConfig cfg;
  cfg.master_seed = 8;
  cfg.qsgd.n_iters = 12;
  const UniformTraining t = train_uniform(cfg);
  write_trace_csv(file("trace.csv"), t.trace);
  const QsgdTrace back = read_trace_csv(file("trace.csv"));
  ASSERT_EQ(back.size(), t.trace.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].n, t.trace[i].n);
    EXPECT_EQ(back[i].t, t.trace[i].t);
    EXPECT_EQ(back[i].a, t.trace[i].a);
    EXPECT_EQ(back[i].theta, t.trace[i].theta);
    EXPECT_EQ(back[i].psi, t.trace[i].psi);
    EXPECT_EQ(back[i].gamma, t.trace[i].gamma);
    EXPECT_EQ(back[i].xi.size(), 0);
  }
  write_text("badtrace.csv", "n,t,a,theta1,psi1,gamma,extra\n");
  EXPECT_THROW(read_trace_csv(file("badtrace.csv")), PersistError);
}

TEST_F(PersistTest, TrajectoryHasOneRowPerState) {
  const EpisodeResult ep = rollout(UniformPolicy{{1.0, 0.0}}, {-0.5, 0.0}, {}, {}, true);
  write_trajectory_csv(file("traj.csv"), ep);
  std::ifstream in(file("traj.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,z,v,u");
  int rows = 0;
  std::string last;
  while (std::getline(in, line)) {
    ++rows;
    last = line;
  }
  EXPECT_EQ(rows, ep.steps + 1);
  EXPECT_EQ(last.back(), ',');
  EXPECT_THROW(write_trajectory_csv(file("x.csv"), rollout(UniformPolicy{{1.0, 0.0}}, {-0.5, 0.0})),
               PersistError);
}

TEST(ConfigJsonTest, RoundTripAndPartialOverride) {
  ExperimentConfig cfg;
  cfg.mode = Mode::kPartitioned;
  cfg.master_seed = 123456789012345ULL;
  cfg.qsgd.epsilon = 0.37;
  cfg.qsgd.gain_matrix = (Eigen::Matrix2d() << 2, 0.5, 0.5, 1).finished();
  cfg.probing.clock_mode = ClockMode::kIterationIndex;
  cfg.tie = TieBreak::kNegative;
  cfg.partition.z_split = -0.4;
  EXPECT_EQ(config_from_json(to_json(cfg)), cfg);
  EXPECT_EQ(config_from_json(nlohmann::json::parse(to_json(cfg).dump())), cfg);

  const ExperimentConfig over =
      config_from_json(nlohmann::json::parse(R"({"n_restarts": 40, "qsgd": {"rho": 0.8}})"));
  EXPECT_EQ(over.n_restarts, 40);
  EXPECT_EQ(over.qsgd.rho, 0.8);
  EXPECT_EQ(over.qsgd.g, 0.08);
  EXPECT_EQ(over.n_train_ics, 80);
}

TEST(ConfigJsonTest, RejectsUnknownAndMistyped) {
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"n_restart": 4})")), PersistError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"qsgd": {"gee": 1}})")), PersistError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"n_restarts": "many"})")), PersistError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"mode": "both"})")), PersistError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse(R"({"probing": {"clock_mode": "wall"}})")),
               PersistError);
  EXPECT_THROW(config_from_json(nlohmann::json::parse("[1, 2]")), PersistError);
}

TEST(ProbingJsonTest, RoundTrip) {
  const ProbingConfig pc = sample_probing_config(std::uint64_t{99});
  EXPECT_EQ(probing_from_json(to_json(pc)), pc);
  EXPECT_EQ(probing_from_json(nlohmann::json::parse(to_json(pc).dump())), pc);
}

TEST(ReportJsonTest, RoundTripAndSchemaChecks) {
  ExperimentConfig cfg;
  cfg.master_seed = 5;
  cfg.n_restarts = 3;
  cfg.qsgd.n_iters = 5;
  HistogramReport rep = histogram_experiment(cfg, 1);
  rep.failures = 1;
  rep.failed_restarts = {7};
  const nlohmann::json j = report_to_json(rep);
  EXPECT_EQ(j["schema"], kHistogramSchema);
  EXPECT_EQ(j["probing"], to_json(experiment_probing(cfg)));
  EXPECT_EQ(report_from_json(nlohmann::json::parse(j.dump(2))), rep);
  EXPECT_EQ(report_to_json(report_from_json(j)).dump(2), j.dump(2));

  nlohmann::json bad = j;
  bad["schema"] = "mcqsgd.histogram/0";
  EXPECT_THROW(report_from_json(bad), PersistError);
  bad = j;
  bad["mode"] = "partitioned";
  EXPECT_THROW(report_from_json(bad), PersistError);
  bad = j;
  bad["counts"][0] = bad["counts"][0].get<long>() + 1;
  EXPECT_THROW(report_from_json(bad), PersistError);
  bad = j;
  bad["failures"] = 0;
  EXPECT_THROW(report_from_json(bad), PersistError);
  bad = j;
  bad.erase("raw_values");
  EXPECT_THROW(report_from_json(bad), PersistError);
  bad = j;
  bad["extra"] = 1;
  EXPECT_THROW(report_from_json(bad), PersistError);
}

TEST(ModeNameTest, Parse) {
  EXPECT_EQ(parse_mode(mode_name(Mode::kUniform)), Mode::kUniform);
  EXPECT_EQ(parse_mode(mode_name(Mode::kPartitioned)), Mode::kPartitioned);
  EXPECT_THROW(parse_mode("Uniform"), PersistError);
}

}  // namespace
}  // namespace mcqsgd
