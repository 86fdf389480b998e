#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskmap/cohorts.hpp"
#include "riskmap/context.hpp"
#include "riskmap/deviation.hpp"
#include "riskmap/feature_map.hpp"
#include "riskmap/gbc.hpp"
#include "riskmap/synth.hpp"
#include "riskmap/trajectory.hpp"

namespace riskmap {

// ---- CSV datasets ----------------------------------------------------------

/// `trajectory_id,driver_id,t,speed_kmh,heading,lat,lng`; rows may arrive in
/// any order and are grouped by trajectory and sorted by t. Speeds convert
/// from km/h on the way in.
std::vector<Trajectory> read_trajectory_csv(const std::filesystem::path& path);
void write_trajectory_csv(const std::filesystem::path& path,
                          std::span<const Trajectory> trajectories);

/// `driver_id,citations,at_fault_accidents`
std::map<std::string, DriverRecord> read_records_csv(const std::filesystem::path& path);
void write_records_csv(const std::filesystem::path& path,
                       const std::map<std::string, DriverRecord>& records);

/// `lat,lng,limit_mph`, coordinates pre-rounded to the grid cell size.
SpeedLimitGrid read_speed_limit_csv(const std::filesystem::path& path,
                                    double cell_size_deg);
void write_speed_limit_csv(const std::filesystem::path& path,
                           const SpeedLimitGrid& grid);

/// `driver_id,label,score`
struct Prediction {
  std::string driver_id;
  CohortLabel label = CohortLabel::Null;
  double score = 0.5;
};
std::vector<Prediction> read_predictions_csv(const std::filesystem::path& path);
void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const Prediction> predictions);

/// `driver_id,label,votes_low,votes_high,votes_total`
void write_cohorts_csv(const std::filesystem::path& path, const CohortOutcome& outcome);

// ---- JSON artifacts --------------------------------------------------------

void write_feature_map_json(const std::filesystem::path& path, const FeatureMap& fm);
FeatureMap read_feature_map_json(const std::filesystem::path& path);

/// One file per driver: an array of {spec_id, driver_id, cells} objects.
void write_deviation_maps_json(const std::filesystem::path& path,
                               const std::map<std::string, DeviationFeatureMap>& maps);
std::map<std::string, DeviationFeatureMap> read_deviation_maps_json(
    const std::filesystem::path& path);

void write_missing_manifest_json(
    const std::filesystem::path& path,
    std::span<const std::pair<std::string, std::string>> missing);

/// Base histogram matrices and natural deviations for every fitted spec.
void write_deviation_model_json(const std::filesystem::path& path,
                                const DeviationModel& model);
DeviationModel read_deviation_model_json(const std::filesystem::path& path);

void write_risk_model_json(const std::filesystem::path& path, const RiskModel& model);
RiskModel read_risk_model_json(const std::filesystem::path& path);

/// Synthetic ground truth, kept apart from the pipeline inputs.
struct PopulationManifestEntry {
  std::string driver_id;
  std::string set;  // reference | modeling | heldout
  Archetype archetype = Archetype::Safe;
  double planted_risk = 0.0;
};
void write_population_manifest_json(const std::filesystem::path& path,
                                    const SyntheticPopulation& population);
std::vector<PopulationManifestEntry> read_population_manifest_json(
    const std::filesystem::path& path);

// ---- helpers ---------------------------------------------------------------

/// Shortest round-trip decimal rendering, used everywhere a double lands in
/// a CSV so outputs are byte-stable.
std::string format_double(double v);

}  // namespace riskmap
