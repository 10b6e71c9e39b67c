#pragma once

// TimeTable is the universal data interchange: timestamped rows on a fixed
// 30-minute lattice (gaps allowed) with named real-valued columns. A cell is
// either a finite value or explicitly missing; missing is stored as NaN and
// only ever enters through the documented channels (empty CSV cell, or a
// transform that flags a row). Tables are treated as immutable after
// construction: transforms return new tables.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace netload {

inline constexpr std::int64_t kStepSeconds = 1800;

std::int64_t parse_iso8601_utc(const std::string& text);
std::string format_iso8601_utc(std::int64_t t);

class TimeTable {
 public:
  TimeTable() = default;
  TimeTable(std::vector<std::int64_t> times, std::vector<std::string> names, Eigen::MatrixXd data,
            std::string timezone = "UTC");

  Eigen::Index rows() const { return static_cast<Eigen::Index>(times_.size()); }
  Eigen::Index cols() const { return static_cast<Eigen::Index>(names_.size()); }

  const std::vector<std::int64_t>& times() const { return times_; }
  const std::vector<std::string>& names() const { return names_; }
  const Eigen::MatrixXd& data() const { return data_; }
  const std::string& timezone() const { return timezone_; }

  bool has_column(const std::string& name) const;
  Eigen::Index column_index(const std::string& name) const;  // throws ValidationError if unknown
  Eigen::VectorXd column(const std::string& name) const { return data_.col(column_index(name)); }

  // Returns a copy with one column appended (or replaced if the name exists).
  TimeTable with_column(const std::string& name, const Eigen::VectorXd& values) const;

  // Row subset by half-open time interval [start, end).
  TimeTable slice(std::int64_t start, std::int64_t end) const;

  static bool is_missing(double v) { return std::isnan(v); }
  Eigen::Index missing_count(const std::string& name) const;

  // Number of lattice steps absent between consecutive rows, summed.
  std::int64_t gap_steps() const;

 private:
  std::vector<std::int64_t> times_;
  std::vector<std::string> names_;
  Eigen::MatrixXd data_;  // rows() x cols()
  std::string timezone_ = "UTC";
};

TimeTable read_timetable_csv(const std::string& path, const std::string& timezone = "UTC");
void write_timetable_csv(const TimeTable& table, const std::string& path);

}  // namespace netload
