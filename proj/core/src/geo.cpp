#include "riskmap/geo.hpp"

#include <algorithm>
#include <cmath>

#include "riskmap/errors.hpp"

namespace riskmap {

bool is_valid(const GeoPoint& p) {
  return std::isfinite(p.lat) && std::isfinite(p.lng) && p.lat >= -90.0 &&
         p.lat <= 90.0 && p.lng >= -180.0 && p.lng <= 180.0;
}

double haversine(const GeoPoint& p1, const GeoPoint& p2) {
  const double lat1 = deg_to_rad(p1.lat);
  const double lat2 = deg_to_rad(p2.lat);
  const double dlat = lat2 - lat1;
  const double dlng = deg_to_rad(p2.lng - p1.lng);

  const double s_lat = std::sin(dlat / 2.0);
  const double s_lng = std::sin(dlng / 2.0);
  const double a = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lng * s_lng;
  const double arc = 2.0 * std::asin(std::min(1.0, std::sqrt(a)));
  return kEarthRadiusMeters * arc;
}

double angle_between(const GeoPoint& a, const GeoPoint& b, const GeoPoint& c) {
  // Local equirectangular projection centered at b: x is east, y is north,
  // with longitude scaled by cos(lat_b).
  const double scale = std::cos(deg_to_rad(b.lat));
  const double ab_x = (b.lng - a.lng) * scale;
  const double ab_y = b.lat - a.lat;
  const double bc_x = (c.lng - b.lng) * scale;
  const double bc_y = c.lat - b.lat;

  const double n_ab = std::hypot(ab_x, ab_y);
  const double n_bc = std::hypot(bc_x, bc_y);
  if (n_ab == 0.0 || n_bc == 0.0) {
    throw DegenerateGeometry("angle_between: coincident points");
  }
  const double cos_theta =
      std::clamp((ab_x * bc_x + ab_y * bc_y) / (n_ab * n_bc), -1.0, 1.0);
  return rad_to_deg(std::acos(cos_theta));
}

double angular_speed(const GeoPoint& p1, const GeoPoint& p2, double dt_s) {
  if (!(dt_s > 0.0)) {
    throw InvalidInterval("angular_speed: dt must be positive");
  }
  return haversine(p1, p2) / kEarthRadiusMeters * (3600.0 / dt_s);
}

}  // namespace riskmap
