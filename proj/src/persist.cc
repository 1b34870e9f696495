#include "mcqsgd/persist.h"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace mcqsgd {

namespace {

using nlohmann::json;

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_row(line);
    if (!have_header) {
      t.header = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw PersistError(path.string() + ": row " + std::to_string(t.rows.size()) + " has " +
                         std::to_string(cells.size()) + " fields, expected " +
                         std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (!have_header) throw PersistError(path.string() + ": empty file");
  return t;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PersistError("cannot write " + path.string());
  return out;
}

std::string join_header(const std::vector<std::string>& h) {
  std::string s;
  for (std::size_t i = 0; i < h.size(); ++i) s += (i ? "," : "") + h[i];
  return s;
}

double cell_double(const CsvTable& t, std::size_t row, std::size_t col, const std::string& file) {
  try {
    return parse_double(t.rows[row][col]);
  } catch (const PersistError& e) {
    throw PersistError(file + ": row " + std::to_string(row) + ", column '" + t.header[col] +
                       "': " + e.what());
  }
}

int cell_int(const CsvTable& t, std::size_t row, std::size_t col, const std::string& file) {
  const std::string& s = t.rows[row][col];
  int v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw PersistError(file + ": row " + std::to_string(row) + ", column '" + t.header[col] +
                       "': not an integer: '" + s + "'");
  }
  return v;
}

void expect_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw PersistError(where + ": expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw PersistError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw PersistError(where + "." + key + ": " + e.what());
  }
}

std::string tie_name(TieBreak t) {
  switch (t) {
    case TieBreak::kZero:
      return "zero";
    case TieBreak::kPositive:
      return "positive";
    case TieBreak::kNegative:
      return "negative";
  }
  return "zero";
}

TieBreak parse_tie(const std::string& s) {
  if (s == "zero") return TieBreak::kZero;
  if (s == "positive") return TieBreak::kPositive;
  if (s == "negative") return TieBreak::kNegative;
  throw PersistError("unknown tie_break '" + s + "'");
}

std::string clock_name(ClockMode m) {
  return m == ClockMode::kOdeTime ? "ode_time" : "iteration_index";
}

ClockMode parse_clock(const std::string& s) {
  if (s == "ode_time") return ClockMode::kOdeTime;
  if (s == "iteration_index") return ClockMode::kIterationIndex;
  throw PersistError("unknown clock_mode '" + s + "'");
}

json matrix_json(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return nullptr;
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, const std::string& where) {
  if (j.is_null()) return {};
  if (!j.is_array() || j.empty()) throw PersistError(where + ": expected array of rows or null");
  const auto n = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw PersistError(where + ": matrix must be square");
    }
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw PersistError("cannot format number");
  return std::string(buf, p);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (b != e && *b == '+') ++b;
  const auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || b == e) throw PersistError("not a number: '" + text + "'");
  return v;
}

std::string mode_name(Mode m) { return m == Mode::kUniform ? "uniform" : "partitioned"; }

Mode parse_mode(const std::string& s) {
  if (s == "uniform") return Mode::kUniform;
  if (s == "partitioned") return Mode::kPartitioned;
  throw PersistError("unknown mode '" + s + "' (expected uniform or partitioned)");
}

void write_ics_csv(const std::filesystem::path& path, const InitialConditionSet& ics) {
  auto out = open_out(path);
  out << (ics.regions ? "z,v,region\n" : "z,v\n");
  for (std::size_t i = 0; i < ics.states.size(); ++i) {
    out << format_double(ics.states[i].z) << ',' << format_double(ics.states[i].v);
    if (ics.regions) out << ',' << region_number((*ics.regions)[i]);
    out << '\n';
  }
  if (!out) throw PersistError("write failed: " + path.string());
}

InitialConditionSet read_ics_csv(const std::filesystem::path& path, IcRole role,
                                 const EnvParams& env, const RegionPartition& p) {
  const std::string file = path.string();
  const CsvTable t = read_csv(path);
  const bool tagged = t.header == std::vector<std::string>{"z", "v", "region"};
  if (!tagged && t.header != std::vector<std::string>{"z", "v"}) {
    throw PersistError(file + ": header must be 'z,v' or 'z,v,region', got '" +
                       join_header(t.header) + "'");
  }
  InitialConditionSet ics;
  ics.role = role;
  if (tagged) ics.regions.emplace();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const State s{cell_double(t, i, 0, file), cell_double(t, i, 1, file)};
    if (!in_box(s, env)) {
      throw PersistError(file + ": row " + std::to_string(i) + " is outside the state box: " +
                         to_string(s));
    }
    ics.states.push_back(s);
    if (tagged) {
      const int n = cell_int(t, i, 2, file);
      if (n < 1 || n > 4) {
        throw PersistError(file + ": row " + std::to_string(i) + ": region must be 1..4");
      }
      ics.regions->push_back(static_cast<Region>(n));
    }
  }
  try {
    ics.validate(env, p);
  } catch (const std::invalid_argument& e) {
    throw PersistError(file + ": " + e.what());
  }
  return ics;
}

void write_theta_csv(const std::filesystem::path& path, const Theta& theta) {
  auto out = open_out(path);
  out << "theta1,theta2\n" << format_double(theta.theta1) << ',' << format_double(theta.theta2) << '\n';
}

void write_theta_csv(const std::filesystem::path& path, const PartitionedTheta& pt) {
  auto out = open_out(path);
  out << "region,theta1,theta2\n";
  for (Region r : kAllRegions) {
    out << region_number(r) << ',' << format_double(pt[r].theta1) << ','
        << format_double(pt[r].theta2) << '\n';
  }
}

ThetaFile read_theta_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  const CsvTable t = read_csv(path);
  if (t.header == std::vector<std::string>{"theta1", "theta2"}) {
    if (t.rows.size() != 1) throw PersistError(file + ": uniform theta file needs exactly 1 row");
    Theta th{cell_double(t, 0, 0, file), cell_double(t, 0, 1, file)};
    if (!is_finite(th)) throw PersistError(file + ": non-finite theta");
    return th;
  }
  if (t.header == std::vector<std::string>{"region", "theta1", "theta2"}) {
    if (t.rows.size() != 4) throw PersistError(file + ": partitioned theta file needs 4 rows");
    PartitionedTheta pt;
    std::array<bool, 4> seen{};
    for (std::size_t i = 0; i < 4; ++i) {
      const int n = cell_int(t, i, 0, file);
      if (n < 1 || n > 4 || seen[static_cast<std::size_t>(n - 1)]) {
        throw PersistError(file + ": row " + std::to_string(i) + ": bad or repeated region");
      }
      seen[static_cast<std::size_t>(n - 1)] = true;
      pt[static_cast<Region>(n)] = {cell_double(t, i, 1, file), cell_double(t, i, 2, file)};
      if (!is_finite(pt[static_cast<Region>(n)])) {
        throw PersistError(file + ": row " + std::to_string(i) + ": non-finite theta");
      }
    }
    return pt;
  }
  throw PersistError(file + ": header must be 'theta1,theta2' or 'region,theta1,theta2'");
}

void write_trace_csv(const std::filesystem::path& path, const QsgdTrace& trace) {
  const auto d = trace.empty() ? 2 : trace.front().theta.size();
  std::vector<std::string> header{"n", "t", "a"};
  for (Eigen::Index i = 1; i <= d; ++i) header.push_back("theta" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) header.push_back("psi" + std::to_string(i));
  header.push_back("gamma");
  auto out = open_out(path);
  out << join_header(header) << '\n';
  for (const auto& rec : trace) {
    out << rec.n << ',' << format_double(rec.t) << ',' << format_double(rec.a);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(rec.theta[i]);
    for (Eigen::Index i = 0; i < d; ++i) out << ',' << format_double(rec.psi[i]);
    out << ',' << format_double(rec.gamma) << '\n';
  }
}

QsgdTrace read_trace_csv(const std::filesystem::path& path) {
  const std::string file = path.string();
  const CsvTable t = read_csv(path);
  if (t.header.size() < 6 || (t.header.size() - 4) % 2 != 0) {
    throw PersistError(file + ": malformed trace header");
  }
  const auto d = static_cast<Eigen::Index>((t.header.size() - 4) / 2);
  std::vector<std::string> expected{"n", "t", "a"};
  for (Eigen::Index i = 1; i <= d; ++i) expected.push_back("theta" + std::to_string(i));
  for (Eigen::Index i = 1; i <= d; ++i) expected.push_back("psi" + std::to_string(i));
  expected.push_back("gamma");
  if (t.header != expected) {
    throw PersistError(file + ": trace header must be '" + join_header(expected) + "'");
  }
  QsgdTrace trace;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    QsgdRecord rec;
    rec.n = cell_int(t, r, 0, file);
    rec.t = cell_double(t, r, 1, file);
    rec.a = cell_double(t, r, 2, file);
    rec.theta.resize(d);
    rec.psi.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      rec.theta[i] = cell_double(t, r, 3 + static_cast<std::size_t>(i), file);
      rec.psi[i] = cell_double(t, r, 3 + static_cast<std::size_t>(d + i), file);
    }
    rec.gamma = cell_double(t, r, 3 + static_cast<std::size_t>(2 * d), file);
    trace.push_back(std::move(rec));
  }
  return trace;
}

void write_trajectory_csv(const std::filesystem::path& path, const EpisodeResult& episode) {
  if (!episode.trajectory || !episode.controls) {
    throw PersistError("write_trajectory_csv: episode was not recorded");
  }
  auto out = open_out(path);
  out << "step,z,v,u\n";
  const auto& traj = *episode.trajectory;
  for (std::size_t k = 0; k < traj.size(); ++k) {
    out << k << ',' << format_double(traj[k].z) << ',' << format_double(traj[k].v) << ',';
    if (k < episode.controls->size()) out << format_double((*episode.controls)[k]);
    out << '\n';
  }
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["mode"] = mode_name(c.mode);
  j["master_seed"] = c.master_seed;
  j["n_train_ics"] = c.n_train_ics;
  j["n_test_ics"] = c.n_test_ics;
  j["n_restarts"] = c.n_restarts;
  j["theta0_range"] = c.theta0_range;
  j["tie_break"] = tie_name(c.tie);
  j["qsgd"] = {{"g", c.qsgd.g},
               {"rho", c.qsgd.rho},
               {"epsilon", c.qsgd.epsilon},
               {"gain_matrix", matrix_json(c.qsgd.gain_matrix)},
               {"n_iters", c.qsgd.n_iters},
               {"divergence_bound", c.qsgd.divergence_bound}};
  j["cost"] = {{"t_max", c.cost.t_max}, {"step_cost", c.cost.step_cost}};
  j["env"] = {{"z_min", c.env.z_min},
              {"z_goal", c.env.z_goal},
              {"v_min", c.env.v_min},
              {"v_max", c.env.v_max},
              {"force_gain", c.env.force_gain},
              {"gravity_gain", c.env.gravity_gain},
              {"slope_wavenumber", c.env.slope_wavenumber}};
  j["partition"] = {{"z_split", c.partition.z_split}, {"v_split", c.partition.v_split}};
  j["probing"] = {{"d", c.probing.d},
                  {"frequencies", c.probing.frequencies},
                  {"phases", c.probing.phases},
                  {"clock_mode", clock_name(c.probing.clock_mode)}};
  return j;
}

ExperimentConfig config_from_json(const json& j, const ExperimentConfig& base) {
  const std::string w = "config";
  expect_keys(j,
              {"mode", "master_seed", "n_train_ics", "n_test_ics", "n_restarts", "theta0_range",
               "tie_break", "qsgd", "cost", "env", "partition", "probing"},
              w);
  ExperimentConfig c = base;
  if (j.contains("mode")) {
    std::string m;
    read_opt(j, "mode", m, w);
    c.mode = parse_mode(m);
  }
  read_opt(j, "master_seed", c.master_seed, w);
  read_opt(j, "n_train_ics", c.n_train_ics, w);
  read_opt(j, "n_test_ics", c.n_test_ics, w);
  read_opt(j, "n_restarts", c.n_restarts, w);
  read_opt(j, "theta0_range", c.theta0_range, w);
  if (j.contains("tie_break")) {
    std::string s;
    read_opt(j, "tie_break", s, w);
    c.tie = parse_tie(s);
  }
  if (j.contains("qsgd")) {
    const json& q = j["qsgd"];
    const std::string wq = w + ".qsgd";
    expect_keys(q, {"g", "rho", "epsilon", "gain_matrix", "n_iters", "divergence_bound"}, wq);
    read_opt(q, "g", c.qsgd.g, wq);
    read_opt(q, "rho", c.qsgd.rho, wq);
    read_opt(q, "epsilon", c.qsgd.epsilon, wq);
    read_opt(q, "n_iters", c.qsgd.n_iters, wq);
    read_opt(q, "divergence_bound", c.qsgd.divergence_bound, wq);
    if (q.contains("gain_matrix")) {
      try {
        c.qsgd.gain_matrix = matrix_from_json(q["gain_matrix"], wq + ".gain_matrix");
      } catch (const json::exception& e) {
        throw PersistError(wq + ".gain_matrix: " + e.what());
      }
    }
  }
  if (j.contains("cost")) {
    const json& q = j["cost"];
    expect_keys(q, {"t_max", "step_cost"}, w + ".cost");
    read_opt(q, "t_max", c.cost.t_max, w + ".cost");
    read_opt(q, "step_cost", c.cost.step_cost, w + ".cost");
  }
  if (j.contains("env")) {
    const json& q = j["env"];
    const std::string we = w + ".env";
    expect_keys(q, {"z_min", "z_goal", "v_min", "v_max", "force_gain", "gravity_gain",
                    "slope_wavenumber"},
                we);
    read_opt(q, "z_min", c.env.z_min, we);
    read_opt(q, "z_goal", c.env.z_goal, we);
    read_opt(q, "v_min", c.env.v_min, we);
    read_opt(q, "v_max", c.env.v_max, we);
    read_opt(q, "force_gain", c.env.force_gain, we);
    read_opt(q, "gravity_gain", c.env.gravity_gain, we);
    read_opt(q, "slope_wavenumber", c.env.slope_wavenumber, we);
  }
  if (j.contains("partition")) {
    const json& q = j["partition"];
    expect_keys(q, {"z_split", "v_split"}, w + ".partition");
    read_opt(q, "z_split", c.partition.z_split, w + ".partition");
    read_opt(q, "v_split", c.partition.v_split, w + ".partition");
  }
  if (j.contains("probing")) {
    const json& q = j["probing"];
    const std::string wp = w + ".probing";
    expect_keys(q, {"d", "frequencies", "phases", "clock_mode"}, wp);
    read_opt(q, "d", c.probing.d, wp);
    read_opt(q, "frequencies", c.probing.frequencies, wp);
    read_opt(q, "phases", c.probing.phases, wp);
    if (q.contains("clock_mode")) {
      std::string s;
      read_opt(q, "clock_mode", s, wp);
      c.probing.clock_mode = parse_clock(s);
    }
  }
  return c;
}

json to_json(const ProbingConfig& pc) {
  json dims = json::array();
  for (const auto& mixture : pc.dims) {
    json terms = json::array();
    for (const auto& t : mixture.terms) {
      terms.push_back({{"amplitude", t.amplitude}, {"frequency", t.frequency}, {"phase", t.phase}});
    }
    dims.push_back(std::move(terms));
  }
  return {{"clock_mode", clock_name(pc.clock_mode)}, {"dims", std::move(dims)}};
}

ProbingConfig probing_from_json(const json& j) {
  expect_keys(j, {"clock_mode", "dims"}, "probing");
  ProbingConfig pc;
  try {
    pc.clock_mode = parse_clock(j.at("clock_mode").get<std::string>());
    for (const json& terms : j.at("dims")) {
      SinusoidMixture m;
      for (const json& t : terms) {
        m.terms.push_back({t.at("amplitude").get<double>(), t.at("frequency").get<double>(),
                           t.at("phase").get<double>()});
      }
      pc.dims.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw PersistError(std::string("probing: ") + e.what());
  }
  return pc;
}

json to_json(const Theta& t) { return json::array({t.theta1, t.theta2}); }

json to_json(const PartitionedTheta& pt) {
  json rows = json::array();
  for (const Theta& t : pt.thetas) rows.push_back(to_json(t));
  return rows;
}

json report_to_json(const HistogramReport& rep) {
  json j;
  j["schema"] = kHistogramSchema;
  j["mode"] = mode_name(rep.config.mode);
  j["config"] = to_json(rep.config);
  j["probing"] = to_json(experiment_probing(rep.config));
  j["raw_values"] = rep.raw_values;
  j["bin_edges"] = rep.bin_edges;
  j["counts"] = rep.counts;
  j["summary"] = {{"mean", rep.summary.mean},
                  {"min", rep.summary.min},
                  {"max", rep.summary.max},
                  {"modes", rep.summary.modes}};
  j["failures"] = rep.failures;
  j["failed_restarts"] = rep.failed_restarts;
  return j;
}

HistogramReport report_from_json(const json& j) {
  expect_keys(j,
              {"schema", "mode", "config", "probing", "raw_values", "bin_edges", "counts",
               "summary", "failures", "failed_restarts"},
              "report");
  if (!j.contains("schema") || j["schema"] != kHistogramSchema) {
    throw PersistError(std::string("report: schema must be '") + kHistogramSchema + "'");
  }
  HistogramReport rep;
  try {
    rep.config = config_from_json(j.at("config"));
    if (parse_mode(j.at("mode").get<std::string>()) != rep.config.mode) {
      throw PersistError("report: mode does not match config.mode");
    }
    rep.raw_values = j.at("raw_values").get<std::vector<double>>();
    rep.bin_edges = j.at("bin_edges").get<std::vector<double>>();
    rep.counts = j.at("counts").get<std::vector<long>>();
    const json& s = j.at("summary");
    expect_keys(s, {"mean", "min", "max", "modes"}, "report.summary");
    rep.summary.mean = s.at("mean").get<double>();
    rep.summary.min = s.at("min").get<double>();
    rep.summary.max = s.at("max").get<double>();
    rep.summary.modes = s.at("modes").get<std::vector<double>>();
    rep.failures = j.at("failures").get<int>();
    rep.failed_restarts = j.at("failed_restarts").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw PersistError(std::string("report: ") + e.what());
  }

  long total = 0;
  for (long c : rep.counts) total += c;
  if (total != static_cast<long>(rep.raw_values.size())) {
    throw PersistError("report: counts do not sum to the number of raw values");
  }
  if (!rep.bin_edges.empty() && rep.bin_edges.size() != rep.counts.size() + 1) {
    throw PersistError("report: need one more bin edge than counts");
  }
  for (std::size_t i = 1; i < rep.bin_edges.size(); ++i) {
    if (!(rep.bin_edges[i - 1] < rep.bin_edges[i])) {
      throw PersistError("report: bin edges must be strictly increasing");
    }
  }
  if (rep.failures != static_cast<int>(rep.failed_restarts.size())) {
    throw PersistError("report: failures does not match failed_restarts");
  }
  return rep;
}

void write_histogram_bins_csv(const std::filesystem::path& path, const HistogramReport& rep) {
  auto out = open_out(path);
  out << "bin_lo,bin_hi,count\n";
  for (std::size_t i = 0; i < rep.counts.size(); ++i) {
    out << format_double(rep.bin_edges[i]) << ',' << format_double(rep.bin_edges[i + 1]) << ','
        << rep.counts[i] << '\n';
  }
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PersistError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw PersistError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw PersistError("write failed: " + path.string());
}

}  // namespace mcqsgd
