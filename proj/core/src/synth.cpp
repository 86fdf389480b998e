#include "riskmap/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "riskmap/errors.hpp"
#include "riskmap/geo.hpp"
#include "riskmap/parallel.hpp"
#include "riskmap/solar.hpp"

namespace riskmap {

std::string to_string(Archetype a) {
  return a == Archetype::Safe ? "Safe" : "Risky";
}

namespace {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a + 0x9E3779B97F4A7C15ULL + b;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double gauss(std::mt19937_64& rng) {
  // Box-Muller; two uniforms per draw keeps the stream layout simple.
  const double u1 = std::max(uniform01(rng), 1e-12);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

int poisson(std::mt19937_64& rng, double lambda) {
  if (lambda <= 0.0) return 0;
  const double limit = std::exp(-lambda);
  int k = 0;
  double p = 1.0;
  do {
    ++k;
    p *= uniform01(rng);
  } while (p > limit);
  return k - 1;
}

GeoPoint home_position(int global_index) {
  const int row = global_index % 50;
  const int col = global_index / 50;
  return GeoPoint{36.0 + row * 0.12, -100.0 + col * 0.15};
}

double wrap360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  return w;
}

constexpr double kUrbanLimits[] = {25.0, 35.0, 45.0};
constexpr double kHighwayLimits[] = {55.0, 65.0, 70.0};

struct LegPlan {
  double limit_mph = 35.0;
  double cruise_mps = 15.0;
  double duration_s = 30.0;
  bool curve = false;
  double curve_rate_dps = 0.0;  // signed
  double curve_duration_s = 0.0;
};

}  // namespace

DriverProfile make_profile(const std::string& driver_id, Archetype archetype,
                           std::uint64_t master_seed) {
  std::mt19937_64 rng(mix(master_seed, fnv1a(driver_id)));
  const double u1 = uniform01(rng), u2 = uniform01(rng), u3 = uniform01(rng),
               u4 = uniform01(rng), u5 = uniform01(rng);

  DriverProfile p;
  p.driver_id = driver_id;
  p.archetype = archetype;
  if (archetype == Archetype::Safe) {
    p.planted_risk = 0.05 + 0.20 * u1;
    p.speeding_bias_mph = -1.0 + 2.0 * u2;
    p.accel_sigma = 0.35 + 0.10 * u3;
    p.turn_speed_factor = 1.00 + 0.10 * u4;
    p.night_trip_fraction = 0.20 + 0.10 * u5;
  } else {
    p.planted_risk = 0.70 + 0.10 * u1;
    p.speeding_bias_mph = 11.0 + 2.0 * u2;
    p.accel_sigma = 0.80 + 0.20 * u3;
    p.turn_speed_factor = 1.45 + 0.15 * u4;
    p.night_trip_fraction = 0.35 + 0.15 * u5;
  }
  return p;
}

DriverRecord generate_records(const DriverProfile& profile, int years,
                              std::uint64_t seed) {
  std::mt19937_64 rng(mix(seed, mix(fnv1a(profile.driver_id), 0xC0FFEE)));
  const double lambda = 2.0 * profile.planted_risk * static_cast<double>(years) / 5.0;
  const int total = poisson(rng, lambda);

  DriverRecord rec;
  rec.driver_id = profile.driver_id;
  for (int i = 0; i < total; ++i) {
    if (uniform01(rng) < 0.6) {
      ++rec.citations;
    } else {
      ++rec.at_fault_accidents;
    }
  }
  return rec;
}

GeneratedTrajectory generate_trajectory(const DriverProfile& profile,
                                        const PopulationConfig& config,
                                        int trip_index, const GeoPoint& home,
                                        int utc_offset_min) {
  const std::int64_t dt_s = static_cast<std::int64_t>(std::llround(1.0 / config.sampling_hz));
  if (dt_s < 1) {
    throw ConfigInvalid("generate_trajectory: sampling must be at most 1 Hz");
  }
  const double dt = static_cast<double>(dt_s);

  std::mt19937_64 rng(
      mix(mix(config.seed, fnv1a(profile.driver_id)), static_cast<std::uint64_t>(trip_index)));

  // trip date in summer 2019, start time placed inside the day or night
  // window of the local civil date
  const CivilDate date = civil_from_days(days_from_civil({2019, 6, 1}) + (trip_index * 3) % 75);
  const TwilightWindow win = civil_twilight(date, home, utc_offset_min);
  const bool night = uniform01(rng) < profile.night_trip_fraction;
  std::int64_t start_t;
  if (night) {
    start_t = win.civil_dusk + 3600 + static_cast<std::int64_t>(uniform01(rng) * 4.0 * 3600.0);
  } else {
    const auto span = static_cast<double>(win.civil_dusk - win.civil_dawn);
    start_t = win.civil_dawn + static_cast<std::int64_t>((0.15 + 0.70 * uniform01(rng)) * span);
  }

  GeneratedTrajectory gen;
  gen.trajectory.id = profile.driver_id + "-t" + std::to_string(trip_index);
  gen.trajectory.driver_id = profile.driver_id;

  double lat = home.lat + (uniform01(rng) - 0.5) * 0.02;
  double lng = home.lng + (uniform01(rng) - 0.5) * 0.02;
  double heading = 90.0 * static_cast<double>(rng() % 4);
  double leg_heading = heading;
  double speed = 3.0 + 2.0 * uniform01(rng);

  const double a_max = 1.5 + profile.accel_sigma;
  const double heading_sigma = 0.30 + 0.60 * (profile.turn_speed_factor - 1.0);

  const auto plan_leg = [&]() {
    LegPlan leg;
    const bool highway = uniform01(rng) < 0.4;
    const auto& limits = highway ? kHighwayLimits : kUrbanLimits;
    leg.limit_mph = limits[rng() % 3];
    leg.cruise_mps = std::max(
        2.0, mph_to_mps(leg.limit_mph + profile.speeding_bias_mph + gauss(rng) * 0.5));
    leg.duration_s = 25.0 + 20.0 * uniform01(rng);
    if (uniform01(rng) < 0.5) {
      leg.curve = true;
      leg.curve_rate_dps = (2.2 + 1.2 * uniform01(rng)) * profile.turn_speed_factor *
                           (uniform01(rng) < 0.5 ? 1.0 : -1.0);
      leg.curve_duration_s = 8.0 + 4.0 * uniform01(rng);
    }
    return leg;
  };

  LegPlan leg = plan_leg();
  double leg_elapsed = 0.0;
  double curve_remaining = 0.0;
  double curve_start_after = leg.curve ? leg.duration_s * (0.3 + 0.3 * uniform01(rng)) : -1.0;

  // turn state
  int turn_steps_left = 0;
  double turn_rate_dps = 0.0;
  double turn_speed_mps = 4.0;

  const int n_points = config.points_per_trajectory;
  gen.trajectory.points.reserve(static_cast<std::size_t>(n_points));
  gen.limit_mph.reserve(static_cast<std::size_t>(n_points));
  gen.phase.reserve(static_cast<std::size_t>(n_points));

  for (int step = 0; step < n_points; ++step) {
    char phase;
    double target;

    if (turn_steps_left > 0) {
      phase = 't';
      target = turn_speed_mps;
      heading += turn_rate_dps * dt + gauss(rng) * 0.3;
      --turn_steps_left;
      if (turn_steps_left == 0) {
        leg = plan_leg();
        leg_heading = wrap360(std::round(heading / 90.0) * 90.0);
        leg_elapsed = 0.0;
        curve_remaining = 0.0;
        curve_start_after = leg.curve ? leg.duration_s * (0.3 + 0.3 * uniform01(rng)) : -1.0;
      }
    } else {
      // time needed to brake for the next intersection turn
      const double next_turn_speed = (4.0 + uniform01(rng)) * profile.turn_speed_factor;
      const double brake_time = (speed - next_turn_speed) / a_max + 1.0;
      if (leg_elapsed + brake_time >= leg.duration_s && speed > next_turn_speed + 0.5) {
        phase = 'd';
        target = next_turn_speed;
      } else if (leg_elapsed + brake_time >= leg.duration_s) {
        // slow enough: enter the intersection turn
        turn_speed_mps = next_turn_speed;
        turn_rate_dps = std::min(19.5, (11.0 + 2.0 * uniform01(rng)) * profile.turn_speed_factor);
        turn_steps_left = std::max(2, static_cast<int>(std::lround(90.0 / (turn_rate_dps * dt))));
        turn_rate_dps *= (uniform01(rng) < 0.5 ? 1.0 : -1.0);
        phase = 't';
        target = turn_speed_mps;
        heading += turn_rate_dps * dt + gauss(rng) * 0.3;
        --turn_steps_left;
      } else {
        target = leg.cruise_mps;
        if (curve_remaining > 0.0) {
          phase = 'v';
          heading += leg.curve_rate_dps * dt + gauss(rng) * 0.2;
          curve_remaining -= dt;
          if (curve_remaining <= 0.0) leg_heading = heading;
        } else {
          if (curve_start_after >= 0.0 && leg_elapsed >= curve_start_after) {
            curve_remaining = leg.curve_duration_s;
            curve_start_after = -1.0;
          }
          const double catching_up = std::abs(target - speed) > 0.8;
          phase = catching_up ? 'a' : 'c';
          double err = leg_heading - heading;
          err -= 360.0 * std::floor(err / 360.0 + 0.5);
          heading += std::clamp(0.25 * err, -3.0, 3.0) + gauss(rng) * heading_sigma;
        }
      }
      leg_elapsed += dt;
    }

    double accel = std::clamp(0.55 * (target - speed), -a_max, a_max) +
                   gauss(rng) * profile.accel_sigma * 0.7;
    accel = std::clamp(accel, -(a_max + 0.8), a_max + 0.8);
    speed = std::max(0.3, speed + accel * dt);
    heading = wrap360(heading);

    const double hrad = deg_to_rad(heading);
    lat += speed * dt * std::cos(hrad) / kMetersPerDegree;
    lng += speed * dt * std::sin(hrad) / (kMetersPerDegree * std::cos(deg_to_rad(lat)));

    TrajectoryPoint pt;
    pt.t = start_t + static_cast<std::int64_t>(step) * dt_s;
    pt.speed = speed;
    pt.heading = heading;
    pt.pos = GeoPoint{lat, lng};
    gen.trajectory.points.push_back(pt);
    gen.limit_mph.push_back(leg.limit_mph);
    gen.phase.push_back(phase);
  }
  return gen;
}

namespace {

SyntheticDriver make_driver(const std::string& id, Archetype archetype,
                            bool presumed_safe, int global_index,
                            const PopulationConfig& config, int utc_offset_min,
                            std::vector<GeneratedTrajectory>& gen_out) {
  SyntheticDriver d;
  d.profile = make_profile(id, archetype, config.seed);
  if (presumed_safe) {
    d.record.driver_id = id;  // reference drivers have no records by selection
  } else {
    d.record = generate_records(d.profile, 5, config.seed);
  }
  const GeoPoint home = home_position(global_index);
  gen_out.resize(static_cast<std::size_t>(config.trajectories_per_driver));
  for (int k = 0; k < config.trajectories_per_driver; ++k) {
    gen_out[static_cast<std::size_t>(k)] =
        generate_trajectory(d.profile, config, k, home, utc_offset_min);
    d.trajectories.push_back(gen_out[static_cast<std::size_t>(k)].trajectory);
  }
  return d;
}

std::string padded_id(const std::string& prefix, int i) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%s-%04d", prefix.c_str(), i);
  return buf;
}

}  // namespace

SyntheticPopulation generate_population(const PopulationConfig& config) {
  if (config.n_reference <= 0 || config.n_modeling <= 0 || config.n_heldout <= 0 ||
      config.trajectories_per_driver <= 0) {
    throw ConfigInvalid("generate_population: all set sizes must be positive");
  }
  if (config.points_per_trajectory < 40) {
    throw ConfigInvalid(
        "generate_population: need at least 40 points per trajectory to fit a turn");
  }
  if (!(config.risky_fraction >= 0.0) || config.risky_fraction > 1.0) {
    throw ConfigInvalid("generate_population: risky_fraction must be in [0, 1]");
  }

  SyntheticPopulation pop;

  struct Slot {
    std::string id;
    Archetype archetype;
    bool presumed_safe;
    int global_index;
    std::vector<SyntheticDriver>* target;
    std::size_t target_index;
  };
  std::vector<Slot> slots;
  int global = 0;

  pop.reference.resize(static_cast<std::size_t>(config.n_reference));
  for (int i = 0; i < config.n_reference; ++i) {
    slots.push_back({padded_id("ref", i), Archetype::Safe, true, global++, &pop.reference,
                     static_cast<std::size_t>(i)});
  }
  const auto mixed = [&](const char* prefix, int n, std::vector<SyntheticDriver>& out) {
    out.resize(static_cast<std::size_t>(n));
    const int n_risky = static_cast<int>(std::lround(config.risky_fraction * n));
    for (int i = 0; i < n; ++i) {
      const Archetype arch = i < n_risky ? Archetype::Risky : Archetype::Safe;
      slots.push_back({padded_id(prefix, i), arch, false, global++, &out,
                       static_cast<std::size_t>(i)});
    }
  };
  mixed("mod", config.n_modeling, pop.modeling);
  mixed("ho", config.n_heldout, pop.heldout);

  std::vector<std::vector<GeneratedTrajectory>> gen(slots.size());
  parallel_for(slots.size(), config.workers, [&](std::size_t s) {
    const auto& slot = slots[s];
    (*slot.target)[slot.target_index] =
        make_driver(slot.id, slot.archetype, slot.presumed_safe, slot.global_index,
                    config, pop.utc_offset_min, gen[s]);
  });

  // grid fill is serial in slot order, so worker count cannot reorder it
  for (std::size_t s = 0; s < slots.size(); ++s) {
    for (const auto& g : gen[s]) {
      for (std::size_t i = 0; i < g.trajectory.points.size(); ++i) {
        const auto& pt = g.trajectory.points[i];
        if (!pop.grid.lookup(pt.pos)) {
          pop.grid.insert(pt.pos, g.limit_mph[i]);
        }
      }
    }
  }
  return pop;
}

}  // namespace riskmap
