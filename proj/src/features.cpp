#include "netload/features.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "netload/errors.hpp"

namespace netload {

namespace {
const double kNaN = std::numeric_limits<double>::quiet_NaN();
}

TimeTable rolling_mean(const TimeTable& table, const std::string& column, std::int64_t window_seconds,
                       std::string out_name) {
  if (window_seconds <= 0 || window_seconds % kStepSeconds != 0)
    throw ValidationError("rolling_mean: window must be a positive multiple of 30 minutes");
  const Eigen::VectorXd x = table.column(column);
  const auto& times = table.times();
  const Eigen::Index n = table.rows();
  const std::int64_t expected = window_seconds / kStepSeconds;

  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  Eigen::Index lo = 0;
  double sum = 0.0;
  Eigen::Index valid = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    // window rows are [lo, i): timestamps in [t_i - window, t_i)
    while (lo < i && times[lo] < times[i] - window_seconds) {
      if (!TimeTable::is_missing(x[lo])) {
        sum -= x[lo];
        --valid;
      }
      ++lo;
    }
    if (i > 0 && !TimeTable::is_missing(x[i - 1])) {
      sum += x[i - 1];
      ++valid;
    }
    const Eigen::Index present = i - lo;
    if (present == expected && valid == expected) {
      out[i] = sum / static_cast<double>(expected);
    }
  }
  if (out_name.empty()) {
    char buf[32];
    if (window_seconds % 3600 == 0) {
      std::snprintf(buf, sizeof(buf), "_rm%lldh", static_cast<long long>(window_seconds / 3600));
    } else {
      std::snprintf(buf, sizeof(buf), "_rm%lldm", static_cast<long long>(window_seconds / 60));
    }
    out_name = column + buf;
  }
  return table.with_column(out_name, out);
}

TimeTable capacity_scale(const TimeTable& table, const std::string& column, const std::string& capacity,
                         std::string out_name) {
  const Eigen::VectorXd x = table.column(column);
  const Eigen::VectorXd cap = table.column(capacity);
  Eigen::VectorXd out(table.rows());
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    if (!TimeTable::is_missing(cap[i]) && cap[i] <= 0.0)
      throw ValidationError("capacity_scale: nonpositive capacity in " + capacity + " at row " +
                            std::to_string(i));
    out[i] = x[i] * cap[i];  // NaN propagates missing
  }
  if (out_name.empty()) out_name = column + "_x_" + capacity;
  return table.with_column(out_name, out);
}

Standardizer fit_standardizer(const TimeTable& table, const std::string& column, std::int64_t start,
                              std::int64_t end) {
  const Eigen::VectorXd x = table.column(column);
  const auto& times = table.times();
  double sum = 0.0;
  Eigen::Index n = 0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    if (times[i] < start || times[i] >= end || TimeTable::is_missing(x[i])) continue;
    sum += x[i];
    ++n;
  }
  if (n < 2) throw ValidationError("fit_standardizer: need >= 2 values in range for " + column);
  const double mean = sum / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    if (times[i] < start || times[i] >= end || TimeTable::is_missing(x[i])) continue;
    ss += (x[i] - mean) * (x[i] - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw ValidationError("fit_standardizer: zero variance in " + column);
  return Standardizer{mean, sd, start, end};
}

TimeTable apply_standardizer(const TimeTable& table, const Standardizer& s, const std::string& column) {
  if (!table.times().empty() && table.times().front() < s.fit_start)
    throw ValidationError("apply_standardizer: table starts before the standardizer fit range");
  Eigen::VectorXd x = table.column(column);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!TimeTable::is_missing(x[i])) x[i] = s.apply(x[i]);
  }
  return table.with_column(column, x);
}

std::string standardizer_to_string(const Standardizer& s) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %lld %lld", s.mean, s.sd, static_cast<long long>(s.fit_start),
                static_cast<long long>(s.fit_end));
  return buf;
}

Standardizer standardizer_from_string(const std::string& text) {
  Standardizer s;
  long long a = 0, b = 0;
  if (std::sscanf(text.c_str(), "%lg %lg %lld %lld", &s.mean, &s.sd, &a, &b) != 4)
    throw ValidationError("bad standardizer record: " + text);
  s.fit_start = a;
  s.fit_end = b;
  return s;
}

}  // namespace netload
