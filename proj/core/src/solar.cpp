#include "riskmap/solar.hpp"

#include <cmath>

namespace riskmap {
namespace {

// Low-precision solar ephemeris after Paul Schlyter's classic formulation,
// good to a minute or two over the 1900-2100 range, which is far inside the
// +/-5 minute tolerance the daylight annotation needs.

double sind(double x) { return std::sin(deg_to_rad(x)); }
double cosd(double x) { return std::cos(deg_to_rad(x)); }
double atan2d(double y, double x) { return rad_to_deg(std::atan2(y, x)); }
double acosd(double x) { return rad_to_deg(std::acos(x)); }

// Reduce an angle to [0, 360).
double rev360(double x) { return x - 360.0 * std::floor(x / 360.0); }

// Reduce an angle to [-180, 180).
double rev180(double x) { return x - 360.0 * std::floor(x / 360.0 + 0.5); }

// Days since 2000 Jan 0.0 (= 1999-12-31 00:00 UT).
double days_since_2000(double epoch_days) { return epoch_days - 10957.0; }

// Sun's ecliptic longitude (deg) and distance (AU) at d days since 2000.
void sun_ecliptic(double d, double& lon, double& dist) {
  const double mean_anomaly = rev360(356.0470 + 0.9856002585 * d);
  const double perihelion_lon = 282.9404 + 4.70935e-5 * d;
  const double ecc = 0.016709 - 1.151e-9 * d;

  const double eccentric_anomaly =
      mean_anomaly + ecc * rad_to_deg(sind(mean_anomaly)) * (1.0 + ecc * cosd(mean_anomaly));
  const double x = cosd(eccentric_anomaly) - ecc;
  const double y = std::sqrt(1.0 - ecc * ecc) * sind(eccentric_anomaly);
  dist = std::hypot(x, y);
  const double true_anomaly = atan2d(y, x);
  lon = rev360(true_anomaly + perihelion_lon);
}

// Sun's right ascension and declination (deg) at d days since 2000.
void sun_ra_dec(double d, double& ra, double& dec) {
  double lon = 0.0, dist = 0.0;
  sun_ecliptic(d, lon, dist);

  const double obliquity = 23.4393 - 3.563e-7 * d;
  const double x = dist * cosd(lon);
  double y = dist * sind(lon);
  const double z = y * sind(obliquity);
  y = y * cosd(obliquity);

  ra = atan2d(y, x);
  dec = atan2d(z, std::hypot(x, y));
}

// Greenwich mean sidereal time at 0h UT, in degrees, extrapolated to d.
double gmst0(double d) {
  return rev360(180.0 + 356.0470 + 282.9404 + (0.9856002585 + 4.70935e-5) * d);
}

}  // namespace

std::int64_t days_from_civil(const CivilDate& date) {
  // Howard Hinnant's civil-days algorithm.
  std::int64_t y = date.year;
  const std::int64_t m = date.month;
  const std::int64_t d = date.day;
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const std::int64_t yoe = y - era * 400;
  const std::int64_t doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const std::int64_t doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + doe - 719468;
}

CivilDate civil_from_days(std::int64_t days) {
  std::int64_t z = days + 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const std::int64_t doe = z - era * 146097;
  const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t y = yoe + era * 400;
  const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const std::int64_t mp = (5 * doy + 2) / 153;
  const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
  const std::int64_t m = mp + (mp < 10 ? 3 : -9);
  return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m),
                   static_cast<int>(d)};
}

TwilightWindow civil_twilight(const CivilDate& date, const GeoPoint& pos,
                              int utc_offset_min) {
  constexpr double kCivilAltitudeDeg = -6.0;

  const std::int64_t epoch_days = days_from_civil(date);
  // Anchor the ephemeris at the UT instant of local civil noon so the window
  // found is the one belonging to this local date.
  const double d = days_since_2000(static_cast<double>(epoch_days)) + 0.5 -
                   static_cast<double>(utc_offset_min) / 1440.0;

  double ra = 0.0, dec = 0.0;
  sun_ra_dec(d, ra, dec);

  const double sidereal = rev360(gmst0(d) + 180.0 + pos.lng);
  const double transit_ut_h = 12.0 - rev180(sidereal - ra) / 15.0;

  TwilightWindow win;
  const double cos_ha = (sind(kCivilAltitudeDeg) - sind(pos.lat) * sind(dec)) /
                        (cosd(pos.lat) * cosd(dec));
  if (cos_ha >= 1.0) {
    win.polar = PolarFlag::AllNight;
    return win;
  }
  if (cos_ha <= -1.0) {
    win.polar = PolarFlag::AllDay;
    return win;
  }

  const double half_arc_h = acosd(cos_ha) / 15.0;
  const double midnight = static_cast<double>(epoch_days) * 86400.0;
  win.civil_dawn =
      static_cast<std::int64_t>(std::llround(midnight + (transit_ut_h - half_arc_h) * 3600.0));
  win.civil_dusk =
      static_cast<std::int64_t>(std::llround(midnight + (transit_ut_h + half_arc_h) * 3600.0));
  return win;
}

}  // namespace riskmap
