#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskmap/feature_map.hpp"

namespace riskmap {

/// Per-cell distribution of feature-map values across a map population.
/// Each cell holds an h_bins-bin probability vector over the value range
/// [0, 1] (uniform bins, last bin closed).
struct HistogramMatrix {
  std::string spec_id;
  int y_bins = 0, x_bins = 0, h_bins = 0;
  std::vector<double> data;  // cell-major: (y * x_bins + x) * h_bins + bin
  std::size_t contributing_maps = 0;

  std::span<const double> cell(int y, int x) const {
    return {data.data() +
                (static_cast<std::size_t>(y) * x_bins + x) * static_cast<std::size_t>(h_bins),
            static_cast<std::size_t>(h_bins)};
  }
};

/// Per-cell Hellinger distances between two histogram matrices; entries are
/// in [0, sqrt(2)/2].
struct DeviationMatrix {
  std::string spec_id;
  int y_bins = 0, x_bins = 0;
  std::vector<double> cells;  // row-major
};

/// A driver's observed deviation minus the natural deviation; signed, in
/// [-sqrt(2)/2, sqrt(2)/2].
struct DeviationFeatureMap {
  std::string spec_id;
  std::string driver_id;
  int y_bins = 0, x_bins = 0;
  std::vector<double> cells;  // row-major
};

/// Hellinger distance 0.5 * sqrt(sum (sqrt(p_i) - sqrt(q_i))^2) between two
/// discrete probability vectors. Throws LengthMismatch / NotADistribution.
double hellinger_distance(std::span<const double> p, std::span<const double> q);

inline constexpr double kMaxHellinger = 0.70710678118654752440;  // sqrt(2)/2

/// Builds the per-cell value histograms over a non-empty population of maps
/// sharing one spec. Throws EmptyInput / SpecMismatch.
HistogramMatrix obtain_histogram_matrix(std::span<const FeatureMap> maps, int h_bins);

/// Per-cell Hellinger distance between two matrices of the same spec/shape.
DeviationMatrix obtain_difference(const HistogramMatrix& base,
                                  const HistogramMatrix& other);

/// Element-wise mean of deviation matrices sharing one spec.
DeviationMatrix summarize(std::span<const DeviationMatrix> diffs);

/// Random partition of the reference drivers into base and control sets.
struct ReferenceSplit {
  std::vector<std::string> base;     // sorted driver ids
  std::vector<std::string> control;  // sorted driver ids
  std::uint64_t seed = 0;
};

ReferenceSplit split_reference(std::vector<std::string> driver_ids,
                               double base_fraction, std::uint64_t seed);

/// Frozen per-spec population statistics: the base histogram matrix and the
/// natural deviation of the control set. Computed once during modeling and
/// reused verbatim to featurize unseen drivers.
struct SpecDeviationStats {
  HistogramMatrix base;
  DeviationMatrix natural;
};

struct DeviationModel {
  int h_bins = 10;
  std::map<std::string, SpecDeviationStats> per_spec;  // keyed by spec id
};

struct DeviationModelConfig {
  int h_bins = 10;
  // Histogram matrices per control driver are too noisy below this many
  // trajectories.
  std::size_t min_control_trajectories = 20;
  unsigned workers = 1;
};

/// Fits base histogram matrices and natural deviations per spec from
/// annotated base/control trajectories. Specs for which the base set has no
/// valid map, or no control driver has one, are omitted from the model.
DeviationModel fit_deviation_model(
    const std::vector<KinematicTrajectory>& base_trajectories,
    const std::map<std::string, std::vector<KinematicTrajectory>>& control_by_driver,
    std::span<const FeatureMapSpec> specs, const DeviationModelConfig& cfg);

/// Deviation feature maps for one driver against a fitted model. Specs where
/// the driver has no valid raw map (or the model has no stats) are absent.
std::map<std::string, DeviationFeatureMap> driver_deviation_maps(
    const DeviationModel& model, const std::string& driver_id,
    const std::vector<KinematicTrajectory>& trajectories,
    std::span<const FeatureMapSpec> specs);

struct DeviationMapSet {
  // driver -> spec -> deviation map
  std::map<std::string, std::map<std::string, DeviationFeatureMap>> by_driver;
  // (driver, spec) pairs with no valid data
  std::vector<std::pair<std::string, std::string>> missing;
  DeviationModel model;
};

/// Full pipeline over annotated trajectories: fits the model on base and
/// control sets, then produces deviation maps for every observed driver.
DeviationMapSet build_deviation_maps(
    const std::vector<KinematicTrajectory>& base_trajectories,
    const std::map<std::string, std::vector<KinematicTrajectory>>& control_by_driver,
    const std::map<std::string, std::vector<KinematicTrajectory>>& observed_by_driver,
    std::span<const FeatureMapSpec> specs, const DeviationModelConfig& cfg);

}  // namespace riskmap
