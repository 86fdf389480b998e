#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskmap/cohorts.hpp"
#include "riskmap/context.hpp"
#include "riskmap/trajectory.hpp"

namespace riskmap {

enum class Archetype { Safe, Risky };

std::string to_string(Archetype a);

/// Planted behavior of one synthetic driver. Safe archetypes sit at
/// planted_risk <= 0.3, risky ones at >= 0.7; the behavior knobs scale with
/// the archetype so the trajectory distributions actually differ.
struct DriverProfile {
  std::string driver_id;
  Archetype archetype = Archetype::Safe;
  double planted_risk = 0.0;        // [0, 1]
  double speeding_bias_mph = 0.0;   // cruise speed over the posted limit
  double accel_sigma = 0.4;         // m/s^2, throttle roughness
  double turn_speed_factor = 1.0;   // >= 1, scales turn speed and rate
  double night_trip_fraction = 0.2; // share of trips started at night
};

struct PopulationConfig {
  int n_reference = 100;
  int n_modeling = 100;
  int n_heldout = 30;
  int trajectories_per_driver = 100;
  int points_per_trajectory = 180;
  double sampling_hz = 1.0;  // only integer-second sampling is supported
  double risky_fraction = 0.5;
  std::uint64_t seed = 42;
  unsigned workers = 1;
};

struct SyntheticDriver {
  DriverProfile profile;
  DriverRecord record;
  std::vector<Trajectory> trajectories;
};

struct SyntheticPopulation {
  std::vector<SyntheticDriver> reference;  // all Safe, records forced to zero
  std::vector<SyntheticDriver> modeling;
  std::vector<SyntheticDriver> heldout;
  SpeedLimitGrid grid{0.001};
  int utc_offset_min = -360;
};

/// One generated trip plus the generator's own ground truth about it, kept
/// for tests; only the trajectory itself is part of the dataset.
struct GeneratedTrajectory {
  Trajectory trajectory;
  std::vector<double> limit_mph;  // posted limit at each point
  // phase per point: 'a' accelerate, 'c' cruise, 'v' curve, 'd' brake, 't' turn
  std::vector<char> phase;
};

/// Deterministic per (config.seed, driver_id, trip_index).
GeneratedTrajectory generate_trajectory(const DriverProfile& profile,
                                        const PopulationConfig& config,
                                        int trip_index, const GeoPoint& home,
                                        int utc_offset_min);

/// Deterministic profile for a driver id under a master seed.
DriverProfile make_profile(const std::string& driver_id, Archetype archetype,
                           std::uint64_t master_seed);

/// Citation/accident counts with mean 2 * planted_risk * years / 5.
DriverRecord generate_records(const DriverProfile& profile, int years,
                              std::uint64_t seed);

/// Builds the reference/modeling/held-out sets and the co-generated
/// speed-limit grid. Byte-deterministic for a given config; per-driver work
/// is independent, so worker count does not change the result.
SyntheticPopulation generate_population(const PopulationConfig& config);

}  // namespace riskmap
