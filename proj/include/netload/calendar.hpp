#pragma once

// Civil-date arithmetic and deterministic calendar features. Local clock
// time is supported for two zones: "UTC" and "Europe/London" (GMT/BST with
// the last-Sunday-of-March/October transition at 01:00 UTC). Anything else
// is an unresolvable time zone.

#include <cstdint>
#include <set>
#include <string>

#include "netload/timetable.hpp"

namespace netload {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d);
void civil_from_days(std::int64_t days, int& y, int& m, int& d);

// 0 = Monday ... 6 = Sunday.
int weekday_from_days(std::int64_t days);

// UTC offset in seconds at instant t. Throws ValidationError for an
// unresolvable zone name.
int utc_offset_seconds(std::int64_t t, const std::string& timezone);

// A set of civil dates expressed as days-since-epoch (local dates).
using DateSet = std::set<std::int64_t>;

// One date per line, YYYY-MM-DD; blank lines and lines starting with '#'
// are ignored.
DateSet read_dates_file(const std::string& path);

inline constexpr int kDayTypeHoliday = 7;  // 0=Mon..6=Sun, 7=public holiday

struct CalendarOptions {
  std::int64_t trend_origin = 1388534400;  // 2014-01-01T00:00:00Z
};

// Adds columns: clock_time (decimal local hour), day_type (0..7, public
// holiday overrides the weekday), school_holiday (0/1), month (local, 1..12),
// fourier_annual_{sin1,cos1,sin2,cos2} (phase zero at the UTC year start),
// trend (years of 365.25 days since the origin).
TimeTable calendar_features(const TimeTable& table, const DateSet& holidays, const DateSet& school_holidays,
                            const CalendarOptions& opts = {});

}  // namespace netload
