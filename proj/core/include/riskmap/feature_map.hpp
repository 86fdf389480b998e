#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "riskmap/trajectory.hpp"

namespace riskmap {

enum class Attribute { Speed, Acceleration, AngleChange, AngularSpeed };

enum class SpecGroup { G1, G2, G3, G4, G5, G6 };

std::string to_string(Attribute a);
std::string to_string(SpecGroup g);
SpecGroup spec_group_from_string(const std::string& s);

/// Which kinematic points a feature map draws from. Daylight is tested
/// against the trajectory-level label; road type and turns are per point.
struct ContextFilter {
  std::optional<RoadType> road;
  std::optional<Daylight> daylight;
  bool turns_only = false;

  bool is_unfiltered() const { return !road && !daylight && !turns_only; }
};

/// Axis ranges are closed intervals in the attribute's native report unit:
/// Speed mph, Acceleration m/s^2, AngleChange degrees, AngularSpeed rph.
struct FeatureMapSpec {
  std::string id;  // "T1".."T22"
  Attribute y_attr = Attribute::Speed;
  Attribute x_attr = Attribute::Acceleration;
  double y_lo = 0.0, y_hi = 1.0;
  double x_lo = 0.0, x_hi = 1.0;
  int y_bins = 20, x_bins = 20;
  ContextFilter filter;
  SpecGroup group = SpecGroup::G1;
};

/// The 22 built-in specs, in canonical T1..T22 order, 20x20 bins each.
const std::vector<FeatureMapSpec>& builtin_specs();

const FeatureMapSpec& spec_by_id(const std::string& id);

/// Max-normalized 2-D frequency matrix for one trajectory under one spec.
struct FeatureMap {
  std::string spec_id;
  int y_bins = 0, x_bins = 0;
  std::vector<double> cells;  // row-major [y * x_bins + x], values in [0, 1]
  std::size_t sample_count = 0;

  double at(int y, int x) const { return cells[static_cast<std::size_t>(y) * x_bins + x]; }
};

/// Attribute value of a kinematic point in the spec's report unit, or
/// nullopt when the attribute is absent at that point.
std::optional<double> attribute_value(const KinematicPoint& kp, Attribute attr);

/// Counts qualifying kpoints into equal-width bins over the closed axis
/// ranges (upper boundary lands in the last bin; out-of-range points are
/// dropped) and normalizes by the maximum cell count. Throws MissingContext
/// when the filter references an annotation that was never applied.
FeatureMap build_raw_feature_map(const KinematicTrajectory& kt,
                                 const FeatureMapSpec& spec);

/// Element-wise mean over maps sharing one spec; sample counts add up.
FeatureMap average_feature_map(std::span<const FeatureMap> maps);

}  // namespace riskmap
