#include "netload/calendar.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "netload/errors.hpp"

namespace netload {

std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

int weekday_from_days(std::int64_t days) {
  // 1970-01-01 was a Thursday
  return static_cast<int>(((days % 7) + 7 + 3) % 7);
}

namespace {

// UTC instant of the last Sunday of `month` at 01:00 UTC. Only called for
// March and October, which both have 31 days.
std::int64_t last_sunday_at_1utc(int year, int month) {
  std::int64_t days = days_from_civil(year, month, 31);
  days -= ((weekday_from_days(days) - 6) % 7 + 7) % 7;
  return days * 86400 + 3600;
}

int london_offset(std::int64_t t) {
  int y, m, d;
  civil_from_days(t >= 0 ? t / 86400 : (t - 86399) / 86400, y, m, d);
  const std::int64_t bst_start = last_sunday_at_1utc(y, 3);
  const std::int64_t bst_end = last_sunday_at_1utc(y, 10);
  return (t >= bst_start && t < bst_end) ? 3600 : 0;
}

}  // namespace

int utc_offset_seconds(std::int64_t t, const std::string& timezone) {
  if (timezone == "UTC") return 0;
  if (timezone == "Europe/London") return london_offset(t);
  throw ValidationError("unresolvable time zone: " + timezone);
}

DateSet read_dates_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  DateSet out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    int y, m, d;
    if (std::sscanf(line.c_str(), "%d-%d-%d", &y, &m, &d) != 3)
      throw ValidationError(path + ":" + std::to_string(row) + ": bad date `" + line + "`");
    out.insert(days_from_civil(y, m, d));
  }
  return out;
}

namespace {

// Fraction of the UTC calendar year elapsed at t, in [0,1).
double year_fraction(std::int64_t t) {
  int y, m, d;
  civil_from_days(t >= 0 ? t / 86400 : (t - 86399) / 86400, y, m, d);
  const std::int64_t start = days_from_civil(y, 1, 1) * 86400;
  const std::int64_t end = days_from_civil(y + 1, 1, 1) * 86400;
  return static_cast<double>(t - start) / static_cast<double>(end - start);
}

}  // namespace

TimeTable calendar_features(const TimeTable& table, const DateSet& holidays, const DateSet& school_holidays,
                            const CalendarOptions& opts) {
  const Eigen::Index n = table.rows();
  Eigen::VectorXd clock(n), day_type(n), school(n), month(n), fs1(n), fc1(n), fs2(n), fc2(n), trend(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const std::int64_t t = table.times()[i];
    const std::int64_t local = t + utc_offset_seconds(t, table.timezone());
    const std::int64_t local_day = (local >= 0) ? local / 86400 : (local - 86399) / 86400;
    const std::int64_t sod = local - local_day * 86400;
    clock[i] = static_cast<double>(sod) / 3600.0;
    day_type[i] = holidays.count(local_day) ? kDayTypeHoliday : weekday_from_days(local_day);
    school[i] = school_holidays.count(local_day) ? 1.0 : 0.0;
    int y, m, d;
    civil_from_days(local_day, y, m, d);
    month[i] = m;
    const double theta = 2.0 * M_PI * year_fraction(t);
    fs1[i] = std::sin(theta);
    fc1[i] = std::cos(theta);
    fs2[i] = std::sin(2.0 * theta);
    fc2[i] = std::cos(2.0 * theta);
    trend[i] = static_cast<double>(t - opts.trend_origin) / (365.25 * 86400.0);
  }
  return table.with_column("clock_time", clock)
      .with_column("day_type", day_type)
      .with_column("school_holiday", school)
      .with_column("month", month)
      .with_column("fourier_annual_sin1", fs1)
      .with_column("fourier_annual_cos1", fc1)
      .with_column("fourier_annual_sin2", fs2)
      .with_column("fourier_annual_cos2", fc2)
      .with_column("trend", trend);
}

}  // namespace netload
