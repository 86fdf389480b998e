#include "riskmap/trajectory.hpp"

#include <cmath>

#include "riskmap/errors.hpp"

namespace riskmap {

void validate(const Trajectory& traj) {
  if (traj.points.size() < 2) {
    throw InvalidTrajectory("trajectory " + traj.id + ": needs at least 2 points");
  }
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    const auto& p = traj.points[i];
    if (!is_valid(p.pos)) {
      throw InvalidTrajectory("trajectory " + traj.id + ": invalid position");
    }
    if (!std::isfinite(p.speed) || p.speed < 0.0) {
      throw InvalidTrajectory("trajectory " + traj.id + ": negative speed");
    }
    if (!std::isfinite(p.heading) || p.heading < 0.0 || p.heading >= 360.0) {
      throw InvalidTrajectory("trajectory " + traj.id + ": heading out of [0, 360)");
    }
    if (i > 0 && traj.points[i].t <= traj.points[i - 1].t) {
      throw InvalidTrajectory("trajectory " + traj.id +
                              ": timestamps not strictly increasing");
    }
  }
}

KinematicTrajectory derive_kinematics(const Trajectory& traj) {
  validate(traj);

  KinematicTrajectory kt;
  kt.trajectory_id = traj.id;
  kt.driver_id = traj.driver_id;
  kt.start_t = traj.points.front().t;

  const auto& pts = traj.points;
  kt.kpoints.reserve(pts.size() - 1);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    KinematicPoint kp;
    kp.t = pts[i].t;
    kp.speed = pts[i].speed;
    kp.heading = pts[i].heading;
    kp.pos = pts[i].pos;

    const double dt = static_cast<double>(pts[i].t - pts[i - 1].t);
    kp.accel = (pts[i].speed - pts[i - 1].speed) / dt;
    kp.angular_speed = angular_speed(pts[i - 1].pos, pts[i].pos, dt);

    if (i + 1 < pts.size()) {
      try {
        kp.angle_change = angle_between(pts[i - 1].pos, pts[i].pos, pts[i + 1].pos);
      } catch (const DegenerateGeometry&) {
        // stationary sample; direction change is undefined
      }
    }
    kt.kpoints.push_back(kp);
  }
  return kt;
}

}  // namespace riskmap
