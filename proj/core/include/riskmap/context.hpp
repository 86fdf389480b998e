#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "riskmap/solar.hpp"
#include "riskmap/trajectory.hpp"

namespace riskmap {

/// File-backed speed-limit lookup keyed by lat/lng rounded to a fixed cell
/// size. Immutable after load; all annotators below are pure.
class SpeedLimitGrid {
 public:
  explicit SpeedLimitGrid(double cell_size_deg = 0.001);

  double cell_size() const { return cell_size_; }
  std::size_t size() const { return entries_.size(); }

  /// Inserts a limit (mph, must be in (0, 90]) for the cell containing p.
  /// Returns false if the cell already holds a limit (first entry wins).
  bool insert(const GeoPoint& p, double limit_mph);

  std::optional<double> lookup(const GeoPoint& p) const;

  /// Cells in deterministic (lat, lng) key order, as (lat, lng, limit).
  std::vector<std::tuple<double, double, double>> cells_sorted() const;

 private:
  using Key = std::pair<std::int64_t, std::int64_t>;
  Key key_for(const GeoPoint& p) const;

  double cell_size_;
  std::map<Key, double> entries_;
};

/// Exact-cell lookup after rounding p; nullopt when the cell is absent.
std::optional<double> speed_limit_at(const SpeedLimitGrid& grid, const GeoPoint& p);

/// Urban/highway boundary: limits below this are urban, at or above highway.
inline constexpr double kHighwayLimitMph = 50.0;

/// Labels each kinematic point Urban ([0, 50) mph), Highway ([50, 90] mph)
/// or Unknown (no limit for its cell), and marks the trajectory as
/// road-annotated.
KinematicTrajectory annotate_road_type(KinematicTrajectory kt,
                                       const SpeedLimitGrid& grid);

/// Trajectory-level Day/Night label from the start time against the civil
/// twilight window of the local date at pos.
KinematicTrajectory annotate_daylight(KinematicTrajectory kt, const GeoPoint& pos,
                                      int utc_offset_min);

struct TurnSegment {
  std::size_t start_index = 0;  // inclusive kpoint indices
  std::size_t end_index = 0;
  double cumulative_heading_change = 0.0;  // degrees, signed
};

struct TurnDetectConfig {
  double threshold_deg = 25.0;  // cumulative heading change that makes a turn
  double window_s = 20.0;       // the change must accrue within this time
};

/// Rule-based turn detection over heading changes (each step wrapped to
/// (-180, 180]). Marks in_turn on covered kpoints, sets turns_annotated, and
/// returns the merged segments sorted by start_index.
std::vector<TurnSegment> detect_turns(KinematicTrajectory& kt,
                                      const TurnDetectConfig& cfg = {});

}  // namespace riskmap
