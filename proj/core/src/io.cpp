#include "riskmap/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "riskmap/errors.hpp"
#include "riskmap/geo.hpp"

namespace riskmap {

using nlohmann::json;

namespace {

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string() + " for reading");
  }
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);  // binary: stable newlines
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed " + what + ": '" + s + "'");
  }
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw IoError("malformed " + what + ": '" + s + "'");
  }
}

void expect_header(std::ifstream& in, const std::string& expected,
                   const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line)) {
    throw IoError(path.string() + " is empty");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) {
    throw IoError(path.string() + ": expected header '" + expected + "', got '" +
                  line + "'");
  }
}

json feature_map_to_json(const FeatureMap& fm) {
  return json{{"spec_id", fm.spec_id},
              {"y_bins", fm.y_bins},
              {"x_bins", fm.x_bins},
              {"cells", fm.cells},
              {"sample_count", fm.sample_count}};
}

FeatureMap feature_map_from_json(const json& j) {
  FeatureMap fm;
  fm.spec_id = j.at("spec_id").get<std::string>();
  fm.y_bins = j.at("y_bins").get<int>();
  fm.x_bins = j.at("x_bins").get<int>();
  fm.cells = j.at("cells").get<std::vector<double>>();
  fm.sample_count = j.at("sample_count").get<std::size_t>();
  if (fm.cells.size() != static_cast<std::size_t>(fm.y_bins) * fm.x_bins) {
    throw IoError("feature map " + fm.spec_id + ": cell count mismatch");
  }
  return fm;
}

void dump_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json load_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::vector<Trajectory> read_trajectory_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_header(in, "trajectory_id,driver_id,t,speed_kmh,heading,lat,lng", path);

  struct Row {
    std::string driver_id;
    TrajectoryPoint pt;
  };
  std::map<std::string, std::vector<Row>> by_trajectory;

  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw IoError(path.string() + ":" + std::to_string(line_no) +
                    ": expected 7 fields");
    }
    Row row;
    row.driver_id = f[1];
    row.pt.t = parse_int(f[2], "timestamp");
    row.pt.speed = kmh_to_mps(parse_double(f[3], "speed_kmh"));
    row.pt.heading = parse_double(f[4], "heading");
    row.pt.pos = GeoPoint{parse_double(f[5], "lat"), parse_double(f[6], "lng")};
    by_trajectory[f[0]].push_back(std::move(row));
  }

  std::vector<Trajectory> out;
  out.reserve(by_trajectory.size());
  for (auto& [tid, rows] : by_trajectory) {
    std::sort(rows.begin(), rows.end(),
              [](const Row& a, const Row& b) { return a.pt.t < b.pt.t; });
    Trajectory traj;
    traj.id = tid;
    traj.driver_id = rows.front().driver_id;
    for (auto& r : rows) {
      if (r.driver_id != traj.driver_id) {
        throw IoError(path.string() + ": trajectory " + tid +
                      " spans multiple drivers");
      }
      traj.points.push_back(r.pt);
    }
    validate(traj);
    out.push_back(std::move(traj));
  }
  return out;
}

void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const Trajectory> trajectories) {
  auto out = open_out(path);
  out << "trajectory_id,driver_id,t,speed_kmh,heading,lat,lng\n";
  char buf[256];
  for (const auto& traj : trajectories) {
    for (const auto& pt : traj.points) {
      std::snprintf(buf, sizeof(buf), "%s,%s,%lld,%.6f,%.6f,%.8f,%.8f\n",
                    traj.id.c_str(), traj.driver_id.c_str(),
                    static_cast<long long>(pt.t), mps_to_kmh(pt.speed), pt.heading,
                    pt.pos.lat, pt.pos.lng);
      out << buf;
    }
  }
}

std::map<std::string, DriverRecord> read_records_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_header(in, "driver_id,citations,at_fault_accidents", path);

  std::map<std::string, DriverRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw IoError(path.string() + ": expected 3 fields in records row");
    }
    DriverRecord rec;
    rec.driver_id = f[0];
    rec.citations = static_cast<int>(parse_int(f[1], "citations"));
    rec.at_fault_accidents = static_cast<int>(parse_int(f[2], "at_fault_accidents"));
    if (rec.citations < 0 || rec.at_fault_accidents < 0) {
      throw IoError(path.string() + ": negative counts for " + rec.driver_id);
    }
    out[rec.driver_id] = rec;
  }
  return out;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::map<std::string, DriverRecord>& records) {
  auto out = open_out(path);
  out << "driver_id,citations,at_fault_accidents\n";
  for (const auto& [id, rec] : records) {
    out << id << ',' << rec.citations << ',' << rec.at_fault_accidents << '\n';
  }
}

SpeedLimitGrid read_speed_limit_csv(const std::filesystem::path& path,
                                    double cell_size_deg) {
  auto in = open_in(path);
  expect_header(in, "lat,lng,limit_mph", path);

  SpeedLimitGrid grid(cell_size_deg);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw IoError(path.string() + ": expected 3 fields in speed-limit row");
    }
    grid.insert(GeoPoint{parse_double(f[0], "lat"), parse_double(f[1], "lng")},
                parse_double(f[2], "limit_mph"));
  }
  return grid;
}

void write_speed_limit_csv(const std::filesystem::path& path,
                           const SpeedLimitGrid& grid) {
  auto out = open_out(path);
  out << "lat,lng,limit_mph\n";
  char buf[128];
  for (const auto& [lat, lng, limit] : grid.cells_sorted()) {
    std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%s\n", lat, lng,
                  format_double(limit).c_str());
    out << buf;
  }
}

std::vector<Prediction> read_predictions_csv(const std::filesystem::path& path) {
  auto in = open_in(path);
  expect_header(in, "driver_id,label,score", path);

  std::vector<Prediction> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 3) {
      throw IoError(path.string() + ": expected 3 fields in prediction row");
    }
    out.push_back(Prediction{f[0], cohort_label_from_string(f[1]),
                             parse_double(f[2], "score")});
  }
  return out;
}

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const Prediction> predictions) {
  auto out = open_out(path);
  out << "driver_id,label,score\n";
  for (const auto& p : predictions) {
    out << p.driver_id << ',' << to_string(p.label) << ',' << format_double(p.score)
        << '\n';
  }
}

void write_cohorts_csv(const std::filesystem::path& path, const CohortOutcome& outcome) {
  auto out = open_out(path);
  out << "driver_id,label,votes_low,votes_high,votes_total\n";
  for (const auto& [driver, label] : outcome.final_labels) {
    const auto& v = outcome.votes.at(driver);
    out << driver << ',' << to_string(label) << ',' << v.low << ',' << v.high << ','
        << v.total() << '\n';
  }
}

void write_feature_map_json(const std::filesystem::path& path, const FeatureMap& fm) {
  dump_json(path, feature_map_to_json(fm));
}

FeatureMap read_feature_map_json(const std::filesystem::path& path) {
  return feature_map_from_json(load_json(path));
}

void write_deviation_maps_json(const std::filesystem::path& path,
                               const std::map<std::string, DeviationFeatureMap>& maps) {
  json arr = json::array();
  for (const auto& [spec_id, dev] : maps) {
    arr.push_back(json{{"spec_id", spec_id},
                       {"driver_id", dev.driver_id},
                       {"y_bins", dev.y_bins},
                       {"x_bins", dev.x_bins},
                       {"cells", dev.cells}});
  }
  dump_json(path, arr);
}

std::map<std::string, DeviationFeatureMap> read_deviation_maps_json(
    const std::filesystem::path& path) {
  const json arr = load_json(path);
  std::map<std::string, DeviationFeatureMap> out;
  for (const auto& j : arr) {
    DeviationFeatureMap dev;
    dev.spec_id = j.at("spec_id").get<std::string>();
    dev.driver_id = j.at("driver_id").get<std::string>();
    dev.y_bins = j.at("y_bins").get<int>();
    dev.x_bins = j.at("x_bins").get<int>();
    dev.cells = j.at("cells").get<std::vector<double>>();
    out.emplace(dev.spec_id, std::move(dev));
  }
  return out;
}

void write_missing_manifest_json(
    const std::filesystem::path& path,
    std::span<const std::pair<std::string, std::string>> missing) {
  json arr = json::array();
  for (const auto& [driver, spec] : missing) {
    arr.push_back(json{{"driver_id", driver}, {"spec_id", spec}});
  }
  dump_json(path, arr);
}

namespace {

json histogram_matrix_to_json(const HistogramMatrix& hm) {
  return json{{"spec_id", hm.spec_id},         {"y_bins", hm.y_bins},
              {"x_bins", hm.x_bins},           {"h_bins", hm.h_bins},
              {"data", hm.data},               {"contributing_maps", hm.contributing_maps}};
}

HistogramMatrix histogram_matrix_from_json(const json& j) {
  HistogramMatrix hm;
  hm.spec_id = j.at("spec_id").get<std::string>();
  hm.y_bins = j.at("y_bins").get<int>();
  hm.x_bins = j.at("x_bins").get<int>();
  hm.h_bins = j.at("h_bins").get<int>();
  hm.data = j.at("data").get<std::vector<double>>();
  hm.contributing_maps = j.at("contributing_maps").get<std::size_t>();
  return hm;
}

}  // namespace

void write_deviation_model_json(const std::filesystem::path& path,
                                const DeviationModel& model) {
  json specs = json::object();
  for (const auto& [spec_id, stats] : model.per_spec) {
    specs[spec_id] = json{{"base", histogram_matrix_to_json(stats.base)},
                          {"natural", json{{"spec_id", stats.natural.spec_id},
                                           {"y_bins", stats.natural.y_bins},
                                           {"x_bins", stats.natural.x_bins},
                                           {"cells", stats.natural.cells}}}};
  }
  dump_json(path, json{{"h_bins", model.h_bins}, {"specs", specs}});
}

DeviationModel read_deviation_model_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  DeviationModel model;
  model.h_bins = j.at("h_bins").get<int>();
  for (const auto& [spec_id, stats] : j.at("specs").items()) {
    SpecDeviationStats s;
    s.base = histogram_matrix_from_json(stats.at("base"));
    const auto& nat = stats.at("natural");
    s.natural.spec_id = nat.at("spec_id").get<std::string>();
    s.natural.y_bins = nat.at("y_bins").get<int>();
    s.natural.x_bins = nat.at("x_bins").get<int>();
    s.natural.cells = nat.at("cells").get<std::vector<double>>();
    model.per_spec.emplace(spec_id, std::move(s));
  }
  return model;
}

void write_risk_model_json(const std::filesystem::path& path, const RiskModel& model) {
  json trees = json::array();
  for (const auto& tree : model.trees) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
      nodes.push_back(json{{"feature", n.feature},
                           {"threshold", n.threshold},
                           {"left", n.left},
                           {"right", n.right},
                           {"leaf_value", n.leaf_value}});
    }
    trees.push_back(json{{"nodes", nodes}});
  }
  json groups = json::array();
  for (const auto g : model.groups) groups.push_back(to_string(g));

  dump_json(path,
            json{{"version", model.version},
                 {"mode", to_string(model.mode)},
                 {"groups", groups},
                 {"params", json{{"learning_rate", model.params.learning_rate},
                                 {"num_estimators", model.params.num_estimators},
                                 {"max_depth", model.params.max_depth},
                                 {"subsample", model.params.subsample},
                                 {"seed", model.params.seed}}},
                 {"layout", json{{"spec_ids", model.layout.spec_ids},
                                 {"y_bins", model.layout.y_bins},
                                 {"x_bins", model.layout.x_bins}}},
                 {"initial_score", model.initial_score},
                 {"trees", trees}});
}

RiskModel read_risk_model_json(const std::filesystem::path& path) {
  const json j = load_json(path);
  RiskModel model;
  model.version = j.at("version").get<int>();
  if (model.version != 1) {
    throw ModelMismatch(path.string() + ": unsupported model version " +
                        std::to_string(model.version));
  }
  model.mode = model_mode_from_string(j.at("mode").get<std::string>());
  for (const auto& g : j.at("groups")) {
    model.groups.push_back(spec_group_from_string(g.get<std::string>()));
  }
  const auto& p = j.at("params");
  model.params.learning_rate = p.at("learning_rate").get<double>();
  model.params.num_estimators = p.at("num_estimators").get<int>();
  model.params.max_depth = p.at("max_depth").get<int>();
  model.params.subsample = p.at("subsample").get<double>();
  model.params.seed = p.at("seed").get<std::uint64_t>();
  const auto& layout = j.at("layout");
  model.layout.spec_ids = layout.at("spec_ids").get<std::vector<std::string>>();
  model.layout.y_bins = layout.at("y_bins").get<int>();
  model.layout.x_bins = layout.at("x_bins").get<int>();
  model.initial_score = j.at("initial_score").get<double>();
  for (const auto& t : j.at("trees")) {
    RegressionTree tree;
    for (const auto& n : t.at("nodes")) {
      TreeNode node;
      node.feature = n.at("feature").get<int>();
      node.threshold = n.at("threshold").get<double>();
      node.left = n.at("left").get<int>();
      node.right = n.at("right").get<int>();
      node.leaf_value = n.at("leaf_value").get<double>();
      tree.nodes.push_back(node);
    }
    model.trees.push_back(std::move(tree));
  }
  return model;
}

void write_population_manifest_json(const std::filesystem::path& path,
                                    const SyntheticPopulation& population) {
  json drivers = json::array();
  const auto add = [&](const std::vector<SyntheticDriver>& set, const char* name) {
    for (const auto& d : set) {
      drivers.push_back(json{{"driver_id", d.profile.driver_id},
                             {"set", name},
                             {"archetype", to_string(d.profile.archetype)},
                             {"planted_risk", d.profile.planted_risk}});
    }
  };
  add(population.reference, "reference");
  add(population.modeling, "modeling");
  add(population.heldout, "heldout");
  dump_json(path, json{{"utc_offset_min", population.utc_offset_min},
                       {"cell_size_deg", population.grid.cell_size()},
                       {"drivers", drivers}});
}

std::vector<PopulationManifestEntry> read_population_manifest_json(
    const std::filesystem::path& path) {
  const json j = load_json(path);
  std::vector<PopulationManifestEntry> out;
  for (const auto& d : j.at("drivers")) {
    PopulationManifestEntry e;
    e.driver_id = d.at("driver_id").get<std::string>();
    e.set = d.at("set").get<std::string>();
    e.archetype = d.at("archetype").get<std::string>() == "Risky" ? Archetype::Risky
                                                                  : Archetype::Safe;
    e.planted_risk = d.at("planted_risk").get<double>();
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace riskmap
