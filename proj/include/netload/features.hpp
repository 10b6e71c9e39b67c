#pragma once

// Column transforms on TimeTable: trailing rolling means, capacity scaling,
// and z-score standardization. All transforms are causal: a value at time t
// depends only on inputs at times <= t (rolling means exclude t itself).

#include <cstdint>
#include <string>

#include "netload/timetable.hpp"

namespace netload {

// Trailing mean of `column` over [t - window, t). The window must be a
// positive multiple of the 30-minute step. A row's value is missing unless
// every lattice step in its window is present and non-missing (so the first
// full window is the earliest valid row). Output column name defaults to
// `<column>_rm<hours>h`.
TimeTable rolling_mean(const TimeTable& table, const std::string& column, std::int64_t window_seconds,
                       std::string out_name = "");

// Elementwise product `column * capacity`, e.g. irradiance scaled by solar
// capacity. All non-missing capacity entries must be positive. Output name
// defaults to `<column>_x_<capacity>`.
TimeTable capacity_scale(const TimeTable& table, const std::string& column, const std::string& capacity,
                         std::string out_name = "");

struct Standardizer {
  double mean = 0.0;
  double sd = 1.0;  // sample sd, n-1 denominator
  std::int64_t fit_start = 0;
  std::int64_t fit_end = 0;

  double apply(double x) const { return (x - mean) / sd; }
  double invert(double z) const { return z * sd + mean; }
};

// Fits mean and sd on the non-missing values of `column` within
// [start, end). Throws ValidationError when fewer than 2 values are present
// or when the column has zero variance.
Standardizer fit_standardizer(const TimeTable& table, const std::string& column, std::int64_t start,
                              std::int64_t end);

// Replaces `column` by its z-scores. Every row of `table` must be at or
// after the standardizer's fit range start.
TimeTable apply_standardizer(const TimeTable& table, const Standardizer& s, const std::string& column);

std::string standardizer_to_string(const Standardizer& s);
Standardizer standardizer_from_string(const std::string& text);

}  // namespace netload
