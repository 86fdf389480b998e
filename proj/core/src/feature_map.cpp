#include "riskmap/feature_map.hpp"

#include <algorithm>
#include <cmath>

#include "riskmap/errors.hpp"
#include "riskmap/geo.hpp"

namespace riskmap {

std::string to_string(Attribute a) {
  switch (a) {
    case Attribute::Speed: return "Speed";
    case Attribute::Acceleration: return "Acceleration";
    case Attribute::AngleChange: return "AngleChange";
    case Attribute::AngularSpeed: return "AngularSpeed";
  }
  return "?";
}

std::string to_string(SpecGroup g) {
  switch (g) {
    case SpecGroup::G1: return "G1";
    case SpecGroup::G2: return "G2";
    case SpecGroup::G3: return "G3";
    case SpecGroup::G4: return "G4";
    case SpecGroup::G5: return "G5";
    case SpecGroup::G6: return "G6";
  }
  return "?";
}

SpecGroup spec_group_from_string(const std::string& s) {
  if (s == "G1") return SpecGroup::G1;
  if (s == "G2") return SpecGroup::G2;
  if (s == "G3") return SpecGroup::G3;
  if (s == "G4") return SpecGroup::G4;
  if (s == "G5") return SpecGroup::G5;
  if (s == "G6") return SpecGroup::G6;
  throw ConfigInvalid("unknown feature group: " + s);
}

namespace {

constexpr int kBins = 20;

FeatureMapSpec speed_accel(std::string id, SpecGroup g, double lo_mph, double hi_mph,
                           double accel, ContextFilter filter) {
  FeatureMapSpec s;
  s.id = std::move(id);
  s.y_attr = Attribute::Speed;
  s.x_attr = Attribute::Acceleration;
  s.y_lo = lo_mph;
  s.y_hi = hi_mph;
  s.x_lo = -accel;
  s.x_hi = accel;
  s.y_bins = s.x_bins = kBins;
  s.filter = filter;
  s.group = g;
  return s;
}

std::vector<FeatureMapSpec> make_builtin_specs() {
  const ContextFilter none{};
  const ContextFilter urban{RoadType::Urban, std::nullopt, false};
  const ContextFilter highway{RoadType::Highway, std::nullopt, false};
  const ContextFilter day{std::nullopt, Daylight::Day, false};
  const ContextFilter night{std::nullopt, Daylight::Night, false};
  const ContextFilter turns{std::nullopt, std::nullopt, true};

  std::vector<FeatureMapSpec> specs;
  specs.reserve(22);

  specs.push_back(speed_accel("T1", SpecGroup::G1, 5, 25, 2.5, none));
  specs.push_back(speed_accel("T2", SpecGroup::G1, 25, 45, 2.0, none));
  specs.push_back(speed_accel("T3", SpecGroup::G1, 45, 80, 1.0, none));

  specs.push_back(speed_accel("T4", SpecGroup::G2, 5, 25, 2.5, urban));
  specs.push_back(speed_accel("T5", SpecGroup::G2, 25, 45, 2.0, urban));
  specs.push_back(speed_accel("T6", SpecGroup::G2, 5, 25, 2.5, highway));
  specs.push_back(speed_accel("T7", SpecGroup::G2, 25, 45, 2.0, highway));
  specs.push_back(speed_accel("T8", SpecGroup::G2, 45, 80, 1.0, highway));

  specs.push_back(speed_accel("T9", SpecGroup::G3, 5, 25, 2.5, day));
  specs.push_back(speed_accel("T10", SpecGroup::G3, 25, 45, 2.0, day));
  specs.push_back(speed_accel("T11", SpecGroup::G3, 45, 80, 1.0, day));
  specs.push_back(speed_accel("T12", SpecGroup::G3, 5, 25, 2.5, night));
  specs.push_back(speed_accel("T13", SpecGroup::G3, 25, 45, 2.0, night));
  specs.push_back(speed_accel("T14", SpecGroup::G3, 45, 80, 1.0, night));

  specs.push_back(speed_accel("T15", SpecGroup::G4, 5, 25, 3.0, turns));
  specs.push_back(speed_accel("T16", SpecGroup::G4, 25, 45, 3.5, turns));
  specs.push_back(speed_accel("T17", SpecGroup::G4, 45, 80, 2.0, turns));

  const auto speed_angle = [&](std::string id, double lo_mph, double hi_mph,
                               double max_deg) {
    FeatureMapSpec s;
    s.id = std::move(id);
    s.y_attr = Attribute::Speed;
    s.x_attr = Attribute::AngleChange;
    s.y_lo = lo_mph;
    s.y_hi = hi_mph;
    s.x_lo = 0.0;
    s.x_hi = max_deg;
    s.y_bins = s.x_bins = kBins;
    s.filter = turns;
    s.group = SpecGroup::G5;
    return s;
  };
  specs.push_back(speed_angle("T18", 5, 25, 20.0));
  specs.push_back(speed_angle("T19", 25, 45, 6.0));
  specs.push_back(speed_angle("T20", 45, 80, 4.0));

  FeatureMapSpec t21;
  t21.id = "T21";
  t21.y_attr = Attribute::Acceleration;
  t21.x_attr = Attribute::AngleChange;
  t21.y_lo = -2.0;
  t21.y_hi = 2.0;
  t21.x_lo = 0.0;
  t21.x_hi = 7.0;
  t21.y_bins = t21.x_bins = kBins;
  t21.filter = turns;
  t21.group = SpecGroup::G6;
  specs.push_back(t21);

  FeatureMapSpec t22;
  t22.id = "T22";
  t22.y_attr = Attribute::AngularSpeed;
  t22.x_attr = Attribute::AngleChange;
  t22.y_lo = 0.0;
  t22.y_hi = 0.025;
  t22.x_lo = 0.0;
  t22.x_hi = 15.0;
  t22.y_bins = t22.x_bins = kBins;
  t22.filter = turns;
  t22.group = SpecGroup::G6;
  specs.push_back(t22);

  return specs;
}

bool passes_filter(const KinematicTrajectory& kt, const KinematicPoint& kp,
                   const ContextFilter& f) {
  if (f.road && kp.road_type != *f.road) return false;
  if (f.daylight && kt.daylight != *f.daylight) return false;
  if (f.turns_only && !kp.in_turn) return false;
  return true;
}

void require_context(const KinematicTrajectory& kt, const FeatureMapSpec& spec) {
  const auto& f = spec.filter;
  if (f.road && !kt.road_annotated) {
    throw MissingContext(spec.id + ": trajectory " + kt.trajectory_id +
                         " has no road-type annotation");
  }
  if (f.daylight && kt.daylight == Daylight::Unknown) {
    throw MissingContext(spec.id + ": trajectory " + kt.trajectory_id +
                         " has no daylight annotation");
  }
  if (f.turns_only && !kt.turns_annotated) {
    throw MissingContext(spec.id + ": trajectory " + kt.trajectory_id +
                         " has no turn annotation");
  }
}

// Equal-width bin over the closed range [lo, hi]; the upper boundary falls
// into the last bin. Returns -1 for out-of-range values.
int bin_index(double value, double lo, double hi, int bins) {
  if (value < lo || value > hi) return -1;
  if (value == hi) return bins - 1;
  const int idx = static_cast<int>((value - lo) / (hi - lo) * bins);
  return std::min(idx, bins - 1);
}

}  // namespace

const std::vector<FeatureMapSpec>& builtin_specs() {
  static const std::vector<FeatureMapSpec> specs = make_builtin_specs();
  return specs;
}

const FeatureMapSpec& spec_by_id(const std::string& id) {
  for (const auto& s : builtin_specs()) {
    if (s.id == id) return s;
  }
  throw ConfigInvalid("unknown feature map spec: " + id);
}

std::optional<double> attribute_value(const KinematicPoint& kp, Attribute attr) {
  switch (attr) {
    case Attribute::Speed:
      return mps_to_mph(kp.speed);
    case Attribute::Acceleration:
      return kp.accel;
    case Attribute::AngleChange:
      return kp.angle_change;
    case Attribute::AngularSpeed:
      return kp.angular_speed;
  }
  return std::nullopt;
}

FeatureMap build_raw_feature_map(const KinematicTrajectory& kt,
                                 const FeatureMapSpec& spec) {
  require_context(kt, spec);

  FeatureMap fm;
  fm.spec_id = spec.id;
  fm.y_bins = spec.y_bins;
  fm.x_bins = spec.x_bins;
  fm.cells.assign(static_cast<std::size_t>(spec.y_bins) * spec.x_bins, 0.0);

  std::vector<std::size_t> counts(fm.cells.size(), 0);
  std::size_t total = 0;
  for (const auto& kp : kt.kpoints) {
    if (!passes_filter(kt, kp, spec.filter)) continue;
    const auto yv = attribute_value(kp, spec.y_attr);
    const auto xv = attribute_value(kp, spec.x_attr);
    if (!yv || !xv) continue;
    const int yi = bin_index(*yv, spec.y_lo, spec.y_hi, spec.y_bins);
    const int xi = bin_index(*xv, spec.x_lo, spec.x_hi, spec.x_bins);
    if (yi < 0 || xi < 0) continue;
    ++counts[static_cast<std::size_t>(yi) * spec.x_bins + xi];
    ++total;
  }

  fm.sample_count = total;
  if (total > 0) {
    const double max_count = static_cast<double>(*std::max_element(counts.begin(), counts.end()));
    for (std::size_t i = 0; i < counts.size(); ++i) {
      fm.cells[i] = static_cast<double>(counts[i]) / max_count;
    }
  }
  return fm;
}

FeatureMap average_feature_map(std::span<const FeatureMap> maps) {
  if (maps.empty()) {
    throw EmptyInput("average_feature_map: no maps");
  }
  const auto& first = maps.front();
  FeatureMap avg;
  avg.spec_id = first.spec_id;
  avg.y_bins = first.y_bins;
  avg.x_bins = first.x_bins;
  avg.cells.assign(first.cells.size(), 0.0);

  // incremental mean: exact when all inputs coincide
  double seen = 0.0;
  for (const auto& m : maps) {
    if (m.spec_id != first.spec_id || m.cells.size() != first.cells.size()) {
      throw SpecMismatch("average_feature_map: mixed specs");
    }
    seen += 1.0;
    for (std::size_t i = 0; i < m.cells.size(); ++i) {
      avg.cells[i] += (m.cells[i] - avg.cells[i]) / seen;
    }
    avg.sample_count += m.sample_count;
  }
  return avg;
}

}  // namespace riskmap
