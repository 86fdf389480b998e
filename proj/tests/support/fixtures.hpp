#pragma once

#include <string>
#include <vector>

#include "riskmap/feature_map.hpp"
#include "riskmap/trajectory.hpp"
#include "support/test_rng.hpp"

namespace riskmap::testing {

/// Straight east-bound trajectory at constant 1 Hz with the given speeds.
inline Trajectory straight_trajectory(const std::vector<double>& speeds_mps,
                                      const std::string& id = "t0",
                                      const std::string& driver = "d0") {
  Trajectory traj;
  traj.id = id;
  traj.driver_id = driver;
  double lng = 0.0;
  for (std::size_t i = 0; i < speeds_mps.size(); ++i) {
    TrajectoryPoint pt;
    pt.t = 1'500'000'000 + static_cast<std::int64_t>(i);
    pt.speed = speeds_mps[i];
    pt.heading = 90.0;
    pt.pos = GeoPoint{0.0, lng};
    traj.points.push_back(pt);
    lng += speeds_mps[i] / kMetersPerDegree;
  }
  return traj;
}

/// Fully annotated kinematic trajectory with random attributes and context
/// flags, for binning tests that need every context dimension defined.
inline KinematicTrajectory random_annotated_kt(TestRng& rng, int max_kpoints = 10) {
  KinematicTrajectory kt;
  kt.trajectory_id = "rand";
  kt.driver_id = "rand";
  kt.start_t = 0;
  kt.daylight = rng.coin() ? Daylight::Day : Daylight::Night;
  kt.road_annotated = true;
  kt.turns_annotated = true;

  const int n = rng.uniform_int(0, max_kpoints);
  for (int i = 0; i < n; ++i) {
    KinematicPoint kp;
    kp.t = i;
    kp.speed = rng.uniform(0.0, 40.0);  // up to ~90 mph
    kp.heading = rng.uniform(0.0, 360.0);
    kp.accel = rng.coin(0.9) ? std::optional<double>(rng.uniform(-4.0, 4.0))
                             : std::nullopt;
    kp.angle_change = rng.coin(0.9) ? std::optional<double>(rng.uniform(0.0, 25.0))
                                    : std::nullopt;
    kp.angular_speed = rng.coin(0.9) ? std::optional<double>(rng.uniform(0.0, 0.03))
                                     : std::nullopt;
    const int road = rng.uniform_int(0, 2);
    kp.road_type = road == 0 ? RoadType::Unknown
                             : (road == 1 ? RoadType::Urban : RoadType::Highway);
    kp.in_turn = rng.coin(0.4);
    kt.kpoints.push_back(kp);
  }
  return kt;
}

}  // namespace riskmap::testing
