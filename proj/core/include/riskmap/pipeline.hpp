#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "riskmap/cohorts.hpp"
#include "riskmap/deviation.hpp"
#include "riskmap/gbc.hpp"
#include "riskmap/io.hpp"
#include "riskmap/synth.hpp"

namespace riskmap {

struct PipelinePaths {
  std::filesystem::path output_dir = "out";
  std::filesystem::path reference_trajectories;
  std::filesystem::path modeling_trajectories;
  std::filesystem::path heldout_trajectories;
  std::filesystem::path records;
  std::filesystem::path speed_limits;
  std::filesystem::path population_manifest;  // optional for report
  std::filesystem::path model_file;
  std::filesystem::path predictions;
};

struct PipelineConfig {
  PipelinePaths paths;
  int y_bins = 20;
  int x_bins = 20;
  int h_bins = 10;
  double cell_size_deg = 0.001;
  int utc_offset_min = -360;
  double base_fraction = 0.7;
  std::size_t min_control_trajectories = 20;
  CohortConfig cohorts;
  GbcParams classifier;
  std::set<SpecGroup> groups = {SpecGroup::G1, SpecGroup::G2, SpecGroup::G3,
                                SpecGroup::G4, SpecGroup::G5, SpecGroup::G6};
  bool train_baseline_model = false;
  bool dump_raw_maps = false;
  std::uint64_t seed = 42;
  unsigned workers = 1;
  PopulationConfig synth;
};

/// Reads a JSON config file; unset fields keep their defaults, relative paths
/// stay relative to the process working directory. Throws ConfigInvalid.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Applies a master-seed override to every seeded stage.
void override_seed(PipelineConfig& cfg, std::uint64_t seed);

/// The 22 specs at the configured bin resolution.
std::vector<FeatureMapSpec> pipeline_specs(const PipelineConfig& cfg);

/// Kinematics + full context annotation for a loaded dataset, grouped by
/// driver. Deterministic for any worker count.
std::map<std::string, std::vector<KinematicTrajectory>> annotate_dataset(
    const std::vector<Trajectory>& trajectories, const SpeedLimitGrid& grid,
    int utc_offset_min, unsigned workers);

/// synth: generate the population and write the dataset files.
void run_synth(const PipelineConfig& cfg);

struct ModelArtifacts {
  DeviationMapSet deviations;
  CohortOutcome cohorts;
  RiskModel model;
  std::optional<RiskModel> baseline;
};

/// model: annotate, fit the deviation stage, refine labels, train the
/// classifier, and persist every intermediate under <output_dir>/model.
ModelArtifacts run_model(const PipelineConfig& cfg);

/// predict: featurize held-out drivers against the persisted modeling
/// artifacts (read-only) and write the predictions CSV.
std::vector<Prediction> run_predict(const PipelineConfig& cfg);

struct CohortReportRow {
  CohortLabel label = CohortLabel::Null;
  int drivers = 0;
  double share_pct = 0.0;
  double no_records_pct = 0.0;
  double mean_risk_score = 0.0;
  std::optional<double> mean_planted_risk;
};

struct CohortReport {
  std::vector<CohortReportRow> rows;
  int total_drivers = 0;
  double overall_mean_risk = 0.0;
  std::optional<double> overall_mean_planted;
};

/// Cohort statistics from predictions and weak records, plus planted ground
/// truth when a population manifest is supplied.
CohortReport compute_report(
    std::span<const Prediction> predictions,
    const std::map<std::string, DriverRecord>& records,
    const std::map<std::string, double>* planted_by_driver);

/// report: compute, write report.csv and chart.csv, and return the report.
CohortReport run_report(const PipelineConfig& cfg);

std::string render_report_text(const CohortReport& report);

}  // namespace riskmap
