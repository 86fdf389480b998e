#pragma once

#include <cstdint>

#include "riskmap/geo.hpp"

namespace riskmap {

struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31
};

enum class PolarFlag { Normal, AllDay, AllNight };

struct TwilightWindow {
  std::int64_t civil_dawn = 0;  // seconds since epoch, UTC
  std::int64_t civil_dusk = 0;
  PolarFlag polar = PolarFlag::Normal;
};

/// Days from 1970-01-01 for a proleptic Gregorian date (negative before).
std::int64_t days_from_civil(const CivilDate& date);

/// Inverse of days_from_civil.
CivilDate civil_from_days(std::int64_t days);

/// Civil twilight window (sun center crossing -6 deg elevation) for the given
/// civil date at a location. The date is the local calendar date; utc_offset
/// anchors the solar-day search so dawn/dusk belong to that local day. At
/// extreme latitudes the window degenerates to AllDay or AllNight and the
/// instants are meaningless.
TwilightWindow civil_twilight(const CivilDate& date, const GeoPoint& pos,
                              int utc_offset_min);

}  // namespace riskmap
