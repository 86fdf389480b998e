#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "riskmap/geo.hpp"

namespace riskmap {

struct TrajectoryPoint {
  std::int64_t t = 0;        // seconds since epoch
  double speed = 0.0;        // m/s, >= 0
  double heading = 0.0;      // degrees, [0, 360)
  GeoPoint pos;
};

struct Trajectory {
  std::string id;
  std::string driver_id;
  std::vector<TrajectoryPoint> points;  // >= 2, timestamps strictly increasing
};

enum class RoadType { Unknown, Urban, Highway };
enum class Daylight { Unknown, Day, Night };

/// One derived sample. Attribute values that cannot be computed at a boundary
/// (or for degenerate geometry) are absent, never zero-filled.
struct KinematicPoint {
  std::int64_t t = 0;
  double speed = 0.0;        // m/s
  double heading = 0.0;      // degrees, carried through for turn detection
  GeoPoint pos;              // carried through for speed-limit lookup
  std::optional<double> accel;          // m/s^2
  std::optional<double> angle_change;   // degrees, [0, 180]
  std::optional<double> angular_speed;  // radians/hour, >= 0
  RoadType road_type = RoadType::Unknown;
  bool in_turn = false;
};

struct KinematicTrajectory {
  std::string trajectory_id;
  std::string driver_id;
  std::int64_t start_t = 0;  // first timestamp of the source trajectory
  Daylight daylight = Daylight::Unknown;
  bool road_annotated = false;
  bool turns_annotated = false;
  std::vector<KinematicPoint> kpoints;
};

/// Validates the Trajectory invariants (>= 2 points, strictly increasing
/// timestamps, finite in-range fields). Throws InvalidTrajectory.
void validate(const Trajectory& traj);

/// Derives per-point kinematics with backward differences. The first source
/// point has no backward interval and is dropped; the last kinematic point
/// has no angle_change. Context fields start out Unknown/false.
KinematicTrajectory derive_kinematics(const Trajectory& traj);

}  // namespace riskmap
