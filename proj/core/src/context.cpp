#include "riskmap/context.hpp"

#include <cmath>

#include "riskmap/errors.hpp"

namespace riskmap {

SpeedLimitGrid::SpeedLimitGrid(double cell_size_deg) : cell_size_(cell_size_deg) {
  if (!(cell_size_deg > 0.0)) {
    throw ConfigInvalid("speed-limit grid cell size must be positive");
  }
}

SpeedLimitGrid::Key SpeedLimitGrid::key_for(const GeoPoint& p) const {
  return {static_cast<std::int64_t>(std::llround(p.lat / cell_size_)),
          static_cast<std::int64_t>(std::llround(p.lng / cell_size_))};
}

bool SpeedLimitGrid::insert(const GeoPoint& p, double limit_mph) {
  if (!(limit_mph > 0.0) || limit_mph > 90.0) {
    throw ConfigInvalid("speed limit must be in (0, 90] mph");
  }
  return entries_.emplace(key_for(p), limit_mph).second;
}

std::optional<double> SpeedLimitGrid::lookup(const GeoPoint& p) const {
  const auto it = entries_.find(key_for(p));
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::tuple<double, double, double>> SpeedLimitGrid::cells_sorted() const {
  std::vector<std::tuple<double, double, double>> out;
  out.reserve(entries_.size());
  for (const auto& [key, limit] : entries_) {
    out.emplace_back(key.first * cell_size_, key.second * cell_size_, limit);
  }
  return out;
}

std::optional<double> speed_limit_at(const SpeedLimitGrid& grid, const GeoPoint& p) {
  return grid.lookup(p);
}

KinematicTrajectory annotate_road_type(KinematicTrajectory kt,
                                       const SpeedLimitGrid& grid) {
  for (auto& kp : kt.kpoints) {
    const auto limit = grid.lookup(kp.pos);
    if (!limit) {
      kp.road_type = RoadType::Unknown;
    } else if (*limit < kHighwayLimitMph) {
      kp.road_type = RoadType::Urban;
    } else {
      kp.road_type = RoadType::Highway;
    }
  }
  kt.road_annotated = true;
  return kt;
}

KinematicTrajectory annotate_daylight(KinematicTrajectory kt, const GeoPoint& pos,
                                      int utc_offset_min) {
  const std::int64_t local_s = kt.start_t + static_cast<std::int64_t>(utc_offset_min) * 60;
  // floor division to the local calendar day
  std::int64_t local_days = local_s / 86400;
  if (local_s % 86400 < 0) --local_days;

  const TwilightWindow win = civil_twilight(civil_from_days(local_days), pos, utc_offset_min);
  switch (win.polar) {
    case PolarFlag::AllDay:
      kt.daylight = Daylight::Day;
      break;
    case PolarFlag::AllNight:
      kt.daylight = Daylight::Night;
      break;
    case PolarFlag::Normal:
      kt.daylight = (kt.start_t >= win.civil_dawn && kt.start_t <= win.civil_dusk)
                        ? Daylight::Day
                        : Daylight::Night;
      break;
  }
  return kt;
}

namespace {

// Wrap a heading difference to (-180, 180].
double wrap_heading(double deg) {
  double w = std::fmod(deg + 180.0, 360.0);
  if (w <= 0.0) w += 360.0;
  return w - 180.0;
}

}  // namespace

std::vector<TurnSegment> detect_turns(KinematicTrajectory& kt,
                                      const TurnDetectConfig& cfg) {
  const auto& kp = kt.kpoints;
  const std::size_t n = kp.size();

  std::vector<double> delta(n, 0.0);  // delta[j]: heading change from j-1 to j
  for (std::size_t j = 1; j < n; ++j) {
    delta[j] = wrap_heading(kp[j].heading - kp[j - 1].heading);
  }

  // Scan for the first window that reaches the threshold in time, extend it
  // while the heading keeps moving the same way, then resume past its end.
  // Segments are disjoint and sorted by construction, and each carries at
  // least the threshold change.
  std::vector<TurnSegment> segments;
  std::size_t i = 0;
  while (i + 1 < n) {
    double cum = 0.0;
    std::size_t hit = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (static_cast<double>(kp[j].t - kp[i].t) > cfg.window_s) break;
      cum += delta[j];
      if (std::abs(cum) >= cfg.threshold_deg) {
        hit = j;
        break;
      }
    }
    if (hit == 0) {
      ++i;
      continue;
    }
    const double direction = cum > 0.0 ? 1.0 : -1.0;
    std::size_t j = hit;
    while (j + 1 < n && direction * delta[j + 1] > 0.0) {
      ++j;
      cum += delta[j];
    }
    segments.push_back(TurnSegment{i, j, cum});
    i = j + 1;
  }

  for (auto& kpoint : kt.kpoints) kpoint.in_turn = false;
  for (const auto& seg : segments) {
    for (std::size_t k = seg.start_index; k <= seg.end_index; ++k) {
      kt.kpoints[k].in_turn = true;
    }
  }
  kt.turns_annotated = true;
  return segments;
}

}  // namespace riskmap
