#include "riskmap/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "riskmap/errors.hpp"
#include "riskmap/parallel.hpp"

namespace riskmap {

using nlohmann::json;

namespace {

std::filesystem::path or_default(const std::filesystem::path& configured,
                                 const std::filesystem::path& fallback) {
  return configured.empty() ? fallback : configured;
}

PipelinePaths resolved_paths(const PipelineConfig& cfg) {
  PipelinePaths p = cfg.paths;
  const auto data = p.output_dir / "dataset";
  p.reference_trajectories = or_default(p.reference_trajectories, data / "reference.csv");
  p.modeling_trajectories = or_default(p.modeling_trajectories, data / "modeling.csv");
  p.heldout_trajectories = or_default(p.heldout_trajectories, data / "heldout.csv");
  p.records = or_default(p.records, data / "records.csv");
  p.speed_limits = or_default(p.speed_limits, data / "speed_limits.csv");
  p.population_manifest = or_default(p.population_manifest, data / "population.json");
  p.model_file = or_default(p.model_file, p.output_dir / "model" / "model.json");
  p.predictions = or_default(p.predictions, p.output_dir / "predictions.csv");
  return p;
}

std::filesystem::path deviation_stats_path(const PipelinePaths& p) {
  return p.output_dir / "model" / "deviation_stats.json";
}

void require_file(const std::filesystem::path& path, const std::string& role) {
  if (!std::filesystem::exists(path)) {
    throw ConfigInvalid("missing " + role + " file: " + path.string());
  }
}

}  // namespace

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigInvalid("cannot open config file: " + path.string());
  }
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigInvalid(path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  try {
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      const auto get_path = [&](const char* key) -> std::filesystem::path {
        return p.contains(key) ? std::filesystem::path(p[key].get<std::string>())
                               : std::filesystem::path{};
      };
      if (p.contains("output_dir")) cfg.paths.output_dir = p["output_dir"].get<std::string>();
      cfg.paths.reference_trajectories = get_path("reference_trajectories");
      cfg.paths.modeling_trajectories = get_path("modeling_trajectories");
      cfg.paths.heldout_trajectories = get_path("heldout_trajectories");
      cfg.paths.records = get_path("records");
      cfg.paths.speed_limits = get_path("speed_limits");
      cfg.paths.population_manifest = get_path("population_manifest");
      cfg.paths.model_file = get_path("model");
      cfg.paths.predictions = get_path("predictions");
    }
    if (j.contains("maps")) {
      const auto& m = j["maps"];
      if (m.contains("y_bins")) cfg.y_bins = m["y_bins"].get<int>();
      if (m.contains("x_bins")) cfg.x_bins = m["x_bins"].get<int>();
      if (m.contains("h_bins")) cfg.h_bins = m["h_bins"].get<int>();
    }
    if (j.contains("cell_size_deg")) cfg.cell_size_deg = j["cell_size_deg"].get<double>();
    if (j.contains("utc_offset_min")) cfg.utc_offset_min = j["utc_offset_min"].get<int>();
    if (j.contains("split")) {
      if (j["split"].contains("base_fraction")) {
        cfg.base_fraction = j["split"]["base_fraction"].get<double>();
      }
    }
    if (j.contains("min_control_trajectories")) {
      cfg.min_control_trajectories = j["min_control_trajectories"].get<std::size_t>();
    }
    if (j.contains("cohorts")) {
      const auto& c = j["cohorts"];
      if (c.contains("k")) cfg.cohorts.k = c["k"].get<int>();
      if (c.contains("confidence")) cfg.cohorts.confidence = c["confidence"].get<double>();
      if (c.contains("restarts")) cfg.cohorts.restarts = c["restarts"].get<int>();
    }
    if (j.contains("classifier")) {
      const auto& c = j["classifier"];
      if (c.contains("learning_rate")) cfg.classifier.learning_rate = c["learning_rate"].get<double>();
      if (c.contains("num_estimators")) cfg.classifier.num_estimators = c["num_estimators"].get<int>();
      if (c.contains("max_depth")) cfg.classifier.max_depth = c["max_depth"].get<int>();
      if (c.contains("subsample")) cfg.classifier.subsample = c["subsample"].get<double>();
    }
    if (j.contains("groups")) {
      cfg.groups.clear();
      for (const auto& g : j["groups"]) {
        cfg.groups.insert(spec_group_from_string(g.get<std::string>()));
      }
    }
    if (j.contains("train_baseline")) cfg.train_baseline_model = j["train_baseline"].get<bool>();
    if (j.contains("dump_raw_maps")) cfg.dump_raw_maps = j["dump_raw_maps"].get<bool>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("workers")) cfg.workers = j["workers"].get<unsigned>();
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      if (s.contains("n_reference")) cfg.synth.n_reference = s["n_reference"].get<int>();
      if (s.contains("n_modeling")) cfg.synth.n_modeling = s["n_modeling"].get<int>();
      if (s.contains("n_heldout")) cfg.synth.n_heldout = s["n_heldout"].get<int>();
      if (s.contains("trajectories_per_driver")) {
        cfg.synth.trajectories_per_driver = s["trajectories_per_driver"].get<int>();
      }
      if (s.contains("points_per_trajectory")) {
        cfg.synth.points_per_trajectory = s["points_per_trajectory"].get<int>();
      }
      if (s.contains("sampling_hz")) cfg.synth.sampling_hz = s["sampling_hz"].get<double>();
      if (s.contains("risky_fraction")) cfg.synth.risky_fraction = s["risky_fraction"].get<double>();
    }
  } catch (const json::exception& e) {
    throw ConfigInvalid(path.string() + ": " + e.what());
  }

  if (cfg.groups.empty()) {
    throw ConfigInvalid("config: group selection must be non-empty");
  }
  if (!(cfg.base_fraction > 0.0) || !(cfg.base_fraction < 1.0)) {
    throw ConfigInvalid("config: split.base_fraction must be in (0, 1)");
  }
  if (cfg.y_bins < 2 || cfg.x_bins < 2 || cfg.h_bins < 2) {
    throw ConfigInvalid("config: bin counts must be at least 2");
  }
  override_seed(cfg, cfg.seed);
  return cfg;
}

void override_seed(PipelineConfig& cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.cohorts.seed = seed;
  cfg.classifier.seed = seed;
  cfg.synth.seed = seed;
}

std::vector<FeatureMapSpec> pipeline_specs(const PipelineConfig& cfg) {
  std::vector<FeatureMapSpec> specs = builtin_specs();
  for (auto& s : specs) {
    s.y_bins = cfg.y_bins;
    s.x_bins = cfg.x_bins;
  }
  return specs;
}

std::map<std::string, std::vector<KinematicTrajectory>> annotate_dataset(
    const std::vector<Trajectory>& trajectories, const SpeedLimitGrid& grid,
    int utc_offset_min, unsigned workers) {
  std::vector<KinematicTrajectory> kts(trajectories.size());
  parallel_for(trajectories.size(), workers, [&](std::size_t i) {
    KinematicTrajectory kt = derive_kinematics(trajectories[i]);
    kt = annotate_road_type(std::move(kt), grid);
    kt = annotate_daylight(std::move(kt), kt.kpoints.front().pos, utc_offset_min);
    detect_turns(kt);
    kts[i] = std::move(kt);
  });

  std::map<std::string, std::vector<KinematicTrajectory>> by_driver;
  for (auto& kt : kts) {
    by_driver[kt.driver_id].push_back(std::move(kt));
  }
  for (auto& [driver, list] : by_driver) {
    std::sort(list.begin(), list.end(),
              [](const KinematicTrajectory& a, const KinematicTrajectory& b) {
                return a.trajectory_id < b.trajectory_id;
              });
  }
  return by_driver;
}

void run_synth(const PipelineConfig& cfg) {
  PopulationConfig synth = cfg.synth;
  synth.seed = cfg.seed;
  synth.workers = cfg.workers;
  const SyntheticPopulation pop = generate_population(synth);

  const auto paths = resolved_paths(cfg);
  const auto collect = [](const std::vector<SyntheticDriver>& set) {
    std::vector<Trajectory> out;
    for (const auto& d : set) {
      out.insert(out.end(), d.trajectories.begin(), d.trajectories.end());
    }
    return out;
  };
  write_trajectory_csv(paths.reference_trajectories, collect(pop.reference));
  write_trajectory_csv(paths.modeling_trajectories, collect(pop.modeling));
  write_trajectory_csv(paths.heldout_trajectories, collect(pop.heldout));

  std::map<std::string, DriverRecord> records;
  for (const auto* set : {&pop.reference, &pop.modeling, &pop.heldout}) {
    for (const auto& d : *set) records[d.profile.driver_id] = d.record;
  }
  write_records_csv(paths.records, records);
  write_speed_limit_csv(paths.speed_limits, pop.grid);
  write_population_manifest_json(paths.population_manifest, pop);
}

namespace {

std::map<std::string, std::vector<double>> cells_by_spec(
    const std::map<std::string, DeviationFeatureMap>& maps) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [spec_id, dev] : maps) out.emplace(spec_id, dev.cells);
  return out;
}

std::vector<FeatureMapSpec> selected_specs(const PipelineConfig& cfg) {
  std::vector<FeatureMapSpec> out;
  for (const auto& spec : pipeline_specs(cfg)) {
    if (cfg.groups.count(spec.group)) out.push_back(spec);
  }
  return out;
}

ModelLayout layout_for(std::span<const FeatureMapSpec> specs) {
  ModelLayout layout;
  layout.y_bins = specs.front().y_bins;
  layout.x_bins = specs.front().x_bins;
  for (const auto& s : specs) layout.spec_ids.push_back(s.id);
  return layout;
}

}  // namespace

ModelArtifacts run_model(const PipelineConfig& cfg) {
  const auto paths = resolved_paths(cfg);
  require_file(paths.reference_trajectories, "reference trajectories");
  require_file(paths.modeling_trajectories, "modeling trajectories");
  require_file(paths.records, "records");
  require_file(paths.speed_limits, "speed limits");

  const auto grid = read_speed_limit_csv(paths.speed_limits, cfg.cell_size_deg);
  const auto records = read_records_csv(paths.records);

  const auto reference = annotate_dataset(read_trajectory_csv(paths.reference_trajectories),
                                          grid, cfg.utc_offset_min, cfg.workers);
  const auto modeling = annotate_dataset(read_trajectory_csv(paths.modeling_trajectories),
                                         grid, cfg.utc_offset_min, cfg.workers);

  std::vector<std::string> reference_ids;
  for (const auto& [driver, _] : reference) reference_ids.push_back(driver);
  const ReferenceSplit split = split_reference(reference_ids, cfg.base_fraction, cfg.seed);

  std::vector<KinematicTrajectory> base_trajs;
  for (const auto& driver : split.base) {
    const auto& list = reference.at(driver);
    base_trajs.insert(base_trajs.end(), list.begin(), list.end());
  }
  std::map<std::string, std::vector<KinematicTrajectory>> control;
  for (const auto& driver : split.control) control[driver] = reference.at(driver);

  const auto all_specs = pipeline_specs(cfg);
  DeviationModelConfig dev_cfg;
  dev_cfg.h_bins = cfg.h_bins;
  dev_cfg.min_control_trajectories = cfg.min_control_trajectories;
  dev_cfg.workers = cfg.workers;

  ModelArtifacts art;
  art.deviations = build_deviation_maps(base_trajs, control, modeling, all_specs, dev_cfg);

  const auto model_dir = paths.output_dir / "model";
  write_deviation_model_json(deviation_stats_path(paths), art.deviations.model);
  for (const auto& [driver, maps] : art.deviations.by_driver) {
    write_deviation_maps_json(model_dir / "deviation_maps" / (driver + ".json"), maps);
  }
  write_missing_manifest_json(model_dir / "missing.json", art.deviations.missing);

  if (cfg.dump_raw_maps) {
    for (const auto& [driver, trajs] : modeling) {
      for (const auto& kt : trajs) {
        for (const auto& spec : all_specs) {
          const FeatureMap fm = build_raw_feature_map(kt, spec);
          write_feature_map_json(model_dir / "raw_maps" / driver / kt.trajectory_id /
                                     (spec.id + ".json"),
                                 fm);
        }
      }
    }
  }

  const auto selected = selected_specs(cfg);
  art.cohorts = identify_risk_cohorts(art.deviations.by_driver, selected, cfg.cohorts, records);
  write_cohorts_csv(model_dir / "cohorts.csv", art.cohorts);
  for (const auto& w : art.cohorts.warnings) {
    std::cerr << "warning: " << w << '\n';
  }

  std::vector<FeatureVector> features;
  std::vector<int> labels;
  for (const auto& [driver, label] : art.cohorts.labeled_set()) {
    if (label == CohortLabel::MediumRisk) continue;  // binary classifier
    features.push_back(
        vectorize(driver, cells_by_spec(art.deviations.by_driver.at(driver)), selected));
    labels.push_back(label == CohortLabel::HighRisk ? 1 : 0);
  }

  std::vector<SpecGroup> group_list(cfg.groups.begin(), cfg.groups.end());
  art.model = train_gbc(features, labels, cfg.classifier, ModelMode::Refined,
                        group_list, layout_for(selected));
  write_risk_model_json(paths.model_file, art.model);

  if (cfg.train_baseline_model) {
    std::map<std::string, std::map<std::string, FeatureMap>> avg_maps;
    for (const auto& [driver, trajs] : modeling) {
      for (const auto& spec : selected) {
        std::vector<FeatureMap> maps;
        for (const auto& kt : trajs) {
          FeatureMap fm = build_raw_feature_map(kt, spec);
          if (fm.sample_count > 0) maps.push_back(std::move(fm));
        }
        if (!maps.empty()) {
          avg_maps[driver].emplace(spec.id, average_feature_map(maps));
        }
      }
    }
    art.baseline = train_baseline(avg_maps, records, cfg.classifier, cfg.groups);
    write_risk_model_json(model_dir / "baseline_model.json", *art.baseline);
  }
  return art;
}

std::vector<Prediction> run_predict(const PipelineConfig& cfg) {
  const auto paths = resolved_paths(cfg);
  require_file(paths.model_file, "model");
  require_file(paths.heldout_trajectories, "held-out trajectories");
  require_file(paths.speed_limits, "speed limits");

  const RiskModel model = read_risk_model_json(paths.model_file);
  const auto grid = read_speed_limit_csv(paths.speed_limits, cfg.cell_size_deg);
  const auto heldout = annotate_dataset(read_trajectory_csv(paths.heldout_trajectories),
                                        grid, cfg.utc_offset_min, cfg.workers);

  // reconstruct the model's spec layout
  std::vector<FeatureMapSpec> specs;
  for (const auto& spec_id : model.layout.spec_ids) {
    FeatureMapSpec s = spec_by_id(spec_id);
    s.y_bins = model.layout.y_bins;
    s.x_bins = model.layout.x_bins;
    specs.push_back(std::move(s));
  }

  DeviationModel dev_model;
  if (model.mode == ModelMode::Refined) {
    const auto stats_path = deviation_stats_path(paths);
    require_file(stats_path, "deviation stats");
    dev_model = read_deviation_model_json(stats_path);
    for (const auto& [spec_id, stats] : dev_model.per_spec) {
      if (stats.base.y_bins != model.layout.y_bins ||
          stats.base.x_bins != model.layout.x_bins) {
        throw ModelMismatch("deviation stats for " + spec_id +
                            " do not match the model bin layout");
      }
    }
  }

  std::vector<const std::string*> drivers;
  std::vector<const std::vector<KinematicTrajectory>*> trajs;
  for (const auto& [driver, list] : heldout) {
    drivers.push_back(&driver);
    trajs.push_back(&list);
  }

  std::vector<Prediction> predictions(drivers.size());
  parallel_for(drivers.size(), cfg.workers, [&](std::size_t i) {
    std::map<std::string, std::vector<double>> cells;
    if (model.mode == ModelMode::Refined) {
      cells = cells_by_spec(driver_deviation_maps(dev_model, *drivers[i], *trajs[i], specs));
    } else {
      for (const auto& spec : specs) {
        std::vector<FeatureMap> maps;
        for (const auto& kt : *trajs[i]) {
          FeatureMap fm = build_raw_feature_map(kt, spec);
          if (fm.sample_count > 0) maps.push_back(std::move(fm));
        }
        if (!maps.empty()) cells.emplace(spec.id, average_feature_map(maps).cells);
      }
    }
    const auto fv = vectorize(*drivers[i], cells, specs);
    const auto [label, score] = predict(model, fv);
    predictions[i] = Prediction{*drivers[i], label, score};
  });

  write_predictions_csv(paths.predictions, predictions);
  return predictions;
}

CohortReport compute_report(std::span<const Prediction> predictions,
                            const std::map<std::string, DriverRecord>& records,
                            const std::map<std::string, double>* planted_by_driver) {
  if (predictions.empty()) {
    throw EmptyInput("compute_report: no predictions");
  }

  struct Acc {
    int n = 0;
    int zero_records = 0;
    double risk_sum = 0.0;
    double planted_sum = 0.0;
    int planted_n = 0;
  };
  std::map<CohortLabel, Acc> acc;
  acc[CohortLabel::LowRisk];  // rows always present, even when empty
  acc[CohortLabel::HighRisk];

  double overall_risk = 0.0;
  double overall_planted = 0.0;
  int overall_planted_n = 0;
  for (const auto& p : predictions) {
    const auto rec = records.find(p.driver_id);
    if (rec == records.end()) {
      throw DriverSetMismatch("compute_report: no record for driver " + p.driver_id);
    }
    auto& a = acc[p.label];
    ++a.n;
    a.risk_sum += rec->second.risk_score();
    if (rec->second.risk_score() == 0) ++a.zero_records;
    overall_risk += rec->second.risk_score();
    if (planted_by_driver) {
      const auto it = planted_by_driver->find(p.driver_id);
      if (it != planted_by_driver->end()) {
        a.planted_sum += it->second;
        ++a.planted_n;
        overall_planted += it->second;
        ++overall_planted_n;
      }
    }
  }

  CohortReport report;
  report.total_drivers = static_cast<int>(predictions.size());
  report.overall_mean_risk = overall_risk / static_cast<double>(predictions.size());
  if (planted_by_driver && overall_planted_n > 0) {
    report.overall_mean_planted = overall_planted / overall_planted_n;
  }
  for (const auto& [label, a] : acc) {
    CohortReportRow row;
    row.label = label;
    row.drivers = a.n;
    row.share_pct = 100.0 * a.n / static_cast<double>(report.total_drivers);
    row.no_records_pct = a.n > 0 ? 100.0 * a.zero_records / static_cast<double>(a.n) : 0.0;
    row.mean_risk_score = a.n > 0 ? a.risk_sum / a.n : 0.0;
    if (a.planted_n > 0) row.mean_planted_risk = a.planted_sum / a.planted_n;
    report.rows.push_back(row);
  }
  return report;
}

CohortReport run_report(const PipelineConfig& cfg) {
  const auto paths = resolved_paths(cfg);
  require_file(paths.predictions, "predictions");
  require_file(paths.records, "records");

  const auto predictions = read_predictions_csv(paths.predictions);
  const auto records = read_records_csv(paths.records);

  std::map<std::string, double> planted;
  const std::map<std::string, double>* planted_ptr = nullptr;
  if (std::filesystem::exists(paths.population_manifest)) {
    for (const auto& e : read_population_manifest_json(paths.population_manifest)) {
      planted[e.driver_id] = e.planted_risk;
    }
    planted_ptr = &planted;
  }

  const CohortReport report = compute_report(predictions, records, planted_ptr);

  {
    auto out = std::ofstream(paths.output_dir / "report.csv", std::ios::binary);
    if (!out) throw IoError("cannot write report.csv");
    out << "cohort,drivers,share_pct,no_records_pct,mean_risk_score,mean_planted_risk\n";
    for (const auto& row : report.rows) {
      out << to_string(row.label) << ',' << row.drivers << ','
          << format_double(row.share_pct) << ',' << format_double(row.no_records_pct)
          << ',' << format_double(row.mean_risk_score) << ','
          << (row.mean_planted_risk ? format_double(*row.mean_planted_risk) : "")
          << '\n';
    }
    out << "overall," << report.total_drivers << ",100,,"
        << format_double(report.overall_mean_risk) << ','
        << (report.overall_mean_planted ? format_double(*report.overall_mean_planted) : "")
        << '\n';
  }
  {
    auto out = std::ofstream(paths.output_dir / "chart.csv", std::ios::binary);
    if (!out) throw IoError("cannot write chart.csv");
    out << "category,value\n";
    for (const auto& row : report.rows) {
      const std::string suffix =
          row.label == CohortLabel::LowRisk
              ? "low"
              : (row.label == CohortLabel::HighRisk ? "high" : "medium");
      out << "share_" << suffix << ',' << format_double(row.share_pct) << '\n';
      out << "no_records_" << suffix << ',' << format_double(row.no_records_pct) << '\n';
      out << "avg_risk_" << suffix << ',' << format_double(row.mean_risk_score) << '\n';
    }
    out << "avg_risk_overall," << format_double(report.overall_mean_risk) << '\n';
  }
  return report;
}

std::string render_report_text(const CohortReport& report) {
  std::ostringstream os;
  os << "cohort      drivers  share%   no-records%  avg-risk";
  const bool planted = report.overall_mean_planted.has_value();
  if (planted) os << "  avg-planted";
  os << '\n';
  char buf[160];
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%-11s %7d  %6.1f  %10.1f  %8.3f",
                  to_string(row.label).c_str(), row.drivers, row.share_pct,
                  row.no_records_pct, row.mean_risk_score);
    os << buf;
    if (planted) {
      if (row.mean_planted_risk) {
        std::snprintf(buf, sizeof(buf), "  %11.3f", *row.mean_planted_risk);
        os << buf;
      } else {
        os << "            -";
      }
    }
    os << '\n';
  }
  std::snprintf(buf, sizeof(buf), "%-11s %7d  %6.1f  %10s  %8.3f", "overall",
                report.total_drivers, 100.0, "-", report.overall_mean_risk);
  os << buf;
  if (planted) {
    std::snprintf(buf, sizeof(buf), "  %11.3f", *report.overall_mean_planted);
    os << buf;
  }
  os << '\n';
  return os.str();
}

}  // namespace riskmap
