#pragma once

#include <cstdint>

namespace riskmap {

inline constexpr double kEarthRadiusMeters = 6.3781e6;
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kMetersPerDegree = kEarthRadiusMeters * kPi / 180.0;

// Exact unit conversion factors. All speeds are m/s internally; CSV input is
// km/h and feature-map bin edges are given in mph.
inline constexpr double kMphToMps = 0.44704;
inline constexpr double kKmhToMps = 1.0 / 3.6;

inline constexpr double mph_to_mps(double mph) { return mph * kMphToMps; }
inline constexpr double mps_to_mph(double mps) { return mps / kMphToMps; }
inline constexpr double kmh_to_mps(double kmh) { return kmh * kKmhToMps; }
inline constexpr double mps_to_kmh(double mps) { return mps / kKmhToMps; }

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

struct GeoPoint {
  double lat = 0.0;  // degrees, [-90, 90]
  double lng = 0.0;  // degrees, [-180, 180]

  bool operator==(const GeoPoint&) const = default;
};

/// True when both coordinates are finite and within range.
bool is_valid(const GeoPoint& p);

/// Great-circle distance in meters.
double haversine(const GeoPoint& p1, const GeoPoint& p2);

/// Angle at vertex b of the path a -> b -> c, in degrees within [0, 180].
/// Zero means straight-ahead motion, 180 a full reversal. The three points
/// are projected onto a local equirectangular plane centered at b before the
/// vectors are formed. Throws DegenerateGeometry when a == b or b == c.
double angle_between(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c);

/// Angular displacement rate in radians per hour over the interval dt (s).
/// Throws InvalidInterval when dt <= 0.
double angular_speed(const GeoPoint& p1, const GeoPoint& p2, double dt_s);

}  // namespace riskmap
