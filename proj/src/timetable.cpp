#include "netload/timetable.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "netload/calendar.hpp"
#include "netload/errors.hpp"

namespace netload {

std::int64_t parse_iso8601_utc(const std::string& text) {
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
  char tz = 0;
  int n = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d:%d%c", &y, &mo, &d, &h, &mi, &s, &tz);
  if (n == 5) {  // no seconds field, e.g. 2014-01-01T00:00Z
    s = 0;
    n = std::sscanf(text.c_str(), "%d-%d-%dT%d:%d%c", &y, &mo, &d, &h, &mi, &tz);
    if (n != 6) throw ValidationError("bad ISO-8601 timestamp: " + text);
  } else if (n != 7) {
    throw ValidationError("bad ISO-8601 timestamp: " + text);
  }
  if (tz != 'Z') throw ValidationError("timestamp must be UTC (trailing Z): " + text);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 60)
    throw ValidationError("timestamp field out of range: " + text);
  return days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s;
}

std::string format_iso8601_utc(std::int64_t t) {
  std::int64_t days = t / 86400;
  std::int64_t sod = t % 86400;
  if (sod < 0) {
    sod += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d, static_cast<int>(sod / 3600),
                static_cast<int>((sod % 3600) / 60), static_cast<int>(sod % 60));
  return buf;
}

TimeTable::TimeTable(std::vector<std::int64_t> times, std::vector<std::string> names, Eigen::MatrixXd data,
                     std::string timezone)
    : times_(std::move(times)), names_(std::move(names)), data_(std::move(data)), timezone_(std::move(timezone)) {
  if (data_.rows() != rows() || data_.cols() != cols())
    throw ValidationError("TimeTable: data shape does not match times/names");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (i > 0 && times_[i] <= times_[i - 1])
      throw ValidationError("TimeTable: timestamps must be strictly increasing (row " + std::to_string(i) +
                            ", " + format_iso8601_utc(times_[i]) + ")");
    if ((times_[i] - times_[0]) % kStepSeconds != 0)
      throw ValidationError("TimeTable: timestamp off the 30-minute lattice: " + format_iso8601_utc(times_[i]));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    for (std::size_t j = i + 1; j < names_.size(); ++j) {
      if (names_[i] == names_[j]) throw ValidationError("TimeTable: duplicate column name " + names_[i]);
    }
  }
}

bool TimeTable::has_column(const std::string& name) const {
  return std::find(names_.begin(), names_.end(), name) != names_.end();
}

Eigen::Index TimeTable::column_index(const std::string& name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) throw ValidationError("unknown column: " + name);
  return static_cast<Eigen::Index>(it - names_.begin());
}

TimeTable TimeTable::with_column(const std::string& name, const Eigen::VectorXd& values) const {
  if (values.size() != rows()) throw ValidationError("with_column: length mismatch for " + name);
  if (has_column(name)) {
    Eigen::MatrixXd data = data_;
    data.col(column_index(name)) = values;
    return TimeTable(times_, names_, std::move(data), timezone_);
  }
  Eigen::MatrixXd data(rows(), cols() + 1);
  data.leftCols(cols()) = data_;
  data.col(cols()) = values;
  auto names = names_;
  names.push_back(name);
  return TimeTable(times_, std::move(names), std::move(data), timezone_);
}

TimeTable TimeTable::slice(std::int64_t start, std::int64_t end) const {
  const auto lo = std::lower_bound(times_.begin(), times_.end(), start) - times_.begin();
  const auto hi = std::lower_bound(times_.begin(), times_.end(), end) - times_.begin();
  std::vector<std::int64_t> times(times_.begin() + lo, times_.begin() + hi);
  return TimeTable(std::move(times), names_, data_.middleRows(lo, hi - lo), timezone_);
}

Eigen::Index TimeTable::missing_count(const std::string& name) const {
  return column(name).array().isNaN().count();
}

std::int64_t TimeTable::gap_steps() const {
  std::int64_t gaps = 0;
  for (std::size_t i = 1; i < times_.size(); ++i) {
    gaps += (times_[i] - times_[i - 1]) / kStepSeconds - 1;
  }
  return gaps;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TimeTable read_timetable_csv(const std::string& path, const std::string& timezone) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
  const auto header = split_csv_line(line);
  int time_col = -1;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "timestamp") {
      time_col = static_cast<int>(i);
    } else {
      names.push_back(header[i]);
    }
  }
  if (time_col < 0) throw ValidationError(path + ": no `timestamp` column in header");

  std::vector<std::int64_t> times;
  std::vector<double> flat;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw ValidationError(path + ":" + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                            " cells, got " + std::to_string(cells.size()));
    times.push_back(parse_iso8601_utc(cells[time_col]));
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (static_cast<int>(i) == time_col) continue;
      const std::string& cell = cells[i];
      if (cell.empty()) {
        flat.push_back(std::numeric_limits<double>::quiet_NaN());
        continue;
      }
      char* endp = nullptr;
      const double v = std::strtod(cell.c_str(), &endp);
      if (endp == cell.c_str() || *endp != '\0')
        throw ValidationError(path + ":" + std::to_string(row) + ": bad number `" + cell + "`");
      flat.push_back(v);
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(times.size());
  const Eigen::Index p = static_cast<Eigen::Index>(names.size());
  Eigen::MatrixXd data(n, p);
  for (Eigen::Index r = 0; r < n; ++r)
    for (Eigen::Index c = 0; c < p; ++c) data(r, c) = flat[r * p + c];
  return TimeTable(std::move(times), std::move(names), std::move(data), timezone);
}

void write_timetable_csv(const TimeTable& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "timestamp";
  for (const auto& n : table.names()) out << ',' << n;
  out << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < table.rows(); ++r) {
    out << format_iso8601_utc(table.times()[r]);
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      const double v = table.data()(r, c);
      out << ',';
      if (!TimeTable::is_missing(v)) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
      }
    }
    out << '\n';
  }
}

}  // namespace netload
