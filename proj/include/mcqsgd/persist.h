#pragma once

// File formats.
//
//   IC files      CSV `z,v` or `z,v,region`
//   Theta files   CSV `theta1,theta2` (one row) or `region,theta1,theta2` (4 rows)
//   Trace files   CSV `n,t,a,theta1,..,thetad,psi1,..,psid,gamma`
//   Trajectories  CSV `step,z,v,u`; u is empty on the final row
//   Reports       JSON, see report_to_json()
//
// Reals are written in shortest round-trip form, so reading a written file
// reproduces every value bit for bit.

#include <filesystem>
#include <stdexcept>
#include <string>
#include <variant>

#include "json.hpp"

#include "mcqsgd/experiment.h"

namespace mcqsgd {

/// I/O and schema-validation failures.
class PersistError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double x);
double parse_double(const std::string& text);

void write_ics_csv(const std::filesystem::path& path, const InitialConditionSet& ics);
/// The role is not stored in the file and is taken from the caller.
InitialConditionSet read_ics_csv(const std::filesystem::path& path, IcRole role = IcRole::kTrain,
                                 const EnvParams& env = {}, const RegionPartition& p = {});

using ThetaFile = std::variant<Theta, PartitionedTheta>;
void write_theta_csv(const std::filesystem::path& path, const Theta& theta);
void write_theta_csv(const std::filesystem::path& path, const PartitionedTheta& pt);
ThetaFile read_theta_csv(const std::filesystem::path& path);

/// xi is not part of the file; loaded records have an empty xi.
void write_trace_csv(const std::filesystem::path& path, const QsgdTrace& trace);
QsgdTrace read_trace_csv(const std::filesystem::path& path);

/// Requires a recorded episode.
void write_trajectory_csv(const std::filesystem::path& path, const EpisodeResult& episode);

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Fields missing from `j` keep their value from `base`; unknown keys are
/// rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, const ExperimentConfig& base = {});

nlohmann::json to_json(const ProbingConfig& pc);
ProbingConfig probing_from_json(const nlohmann::json& j);

nlohmann::json to_json(const Theta& t);
nlohmann::json to_json(const PartitionedTheta& pt);

inline constexpr const char* kHistogramSchema = "mcqsgd.histogram/1";

/// Embeds the resolved config and the probing signal it induces.
nlohmann::json report_to_json(const HistogramReport& rep);
HistogramReport report_from_json(const nlohmann::json& j);

void write_histogram_bins_csv(const std::filesystem::path& path, const HistogramReport& rep);

std::string mode_name(Mode m);
Mode parse_mode(const std::string& s);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace mcqsgd
