#pragma once

// Spliced predictive distribution: an interpolated central quantile function
// between probability levels alpha_lo and alpha_hi, with a GPD tail grafted
// on each side:
//
//   F(y) = alpha_lo * (1 - F_GPD(q_lo - y | tail_lo))          y <  q_lo
//        = central interpolation                               q_lo <= y <= q_hi
//        = alpha_hi + (1 - alpha_hi) * F_GPD(y - q_hi | tail_hi)   y >  q_hi
//
// Both tail arguments are exceedances (distance past the junction quantile),
// so F is continuous, equals alpha_lo at q_lo and alpha_hi at q_hi exactly,
// and is non-decreasing everywhere. The central region interpolates the
// quantile function piecewise-linearly between estimated levels: monotone by
// construction and exact at the knots.

#include <Eigen/Dense>
#include <algorithm>
#include <stdexcept>
#include <vector>

#include "netload/gpd.hpp"

namespace netload {

struct QuantileCurve {
  Eigen::VectorXd levels;  // strictly increasing, in (0,1), size >= 2
  Eigen::VectorXd values;  // non-decreasing, same size

  QuantileCurve() = default;
  QuantileCurve(Eigen::VectorXd levels_, Eigen::VectorXd values_)
      : levels(std::move(levels_)), values(std::move(values_)) {
    validate();
  }

  void validate() const {
    if (levels.size() < 2 || levels.size() != values.size())
      throw std::invalid_argument("QuantileCurve: need >= 2 aligned levels/values");
    for (Eigen::Index i = 0; i < levels.size(); ++i) {
      if (!(levels[i] > 0.0 && levels[i] < 1.0))
        throw std::invalid_argument("QuantileCurve: levels must lie in (0,1)");
      if (i > 0 && !(levels[i] > levels[i - 1]))
        throw std::invalid_argument("QuantileCurve: levels must be strictly increasing");
      if (i > 0 && values[i] < values[i - 1])
        throw std::invalid_argument("QuantileCurve: values must be non-decreasing");
    }
  }
};

struct SplicedForecast {
  QuantileCurve central;
  GpdParams<double> tail_lo;  // left tail, exceedance = q_lo - y
  GpdParams<double> tail_hi;  // right tail, exceedance = y - q_hi

  SplicedForecast(QuantileCurve central_, GpdParams<double> lo, GpdParams<double> hi)
      : central(std::move(central_)), tail_lo(lo), tail_hi(hi) {
    central.validate();
    if (!(alpha_lo() < 0.5 && alpha_hi() > 0.5))
      throw std::invalid_argument("SplicedForecast: need alpha_lo < 0.5 < alpha_hi");
  }

  double alpha_lo() const { return central.levels[0]; }
  double alpha_hi() const { return central.levels[central.levels.size() - 1]; }
  double q_lo() const { return central.values[0]; }
  double q_hi() const { return central.values[central.values.size() - 1]; }
};

inline double spliced_cdf(double y, const SplicedForecast& f) {
  const double q_lo = f.q_lo(), q_hi = f.q_hi();
  if (y < q_lo) {
    const double exce = q_lo - y;
    if (exce >= f.tail_lo.support_upper()) return 0.0;
    return f.alpha_lo() * (1.0 - gpd_cdf(exce, f.tail_lo));
  }
  if (y > q_hi) {
    const double exce = y - q_hi;
    if (exce >= f.tail_hi.support_upper()) return 1.0;
    return f.alpha_hi() + (1.0 - f.alpha_hi()) * gpd_cdf(exce, f.tail_hi);
  }
  // Central: invert the piecewise-linear quantile function. For a flat run
  // of values (an atom) this returns the top level, i.e. the right-continuous
  // CDF value.
  const auto& lv = f.central.levels;
  const auto& qv = f.central.values;
  const double* begin = qv.data();
  const double* end = qv.data() + qv.size();
  const Eigen::Index hi = std::min<Eigen::Index>(std::upper_bound(begin, end, y) - begin, qv.size() - 1);
  const Eigen::Index lo = hi - 1;
  if (hi == 0) return lv[0];
  const double dq = qv[hi] - qv[lo];
  if (dq <= 0.0) return lv[hi];
  const double t = (y - qv[lo]) / dq;
  return lv[lo] + t * (lv[hi] - lv[lo]);
}

inline double spliced_quantile(double prob, const SplicedForecast& f) {
  if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("spliced_quantile: prob must be in (0,1)");
  const double a_lo = f.alpha_lo(), a_hi = f.alpha_hi();
  if (prob <= a_lo) {
    return f.q_lo() - gpd_quantile(1.0 - prob / a_lo, f.tail_lo);
  }
  if (prob >= a_hi) {
    return f.q_hi() + gpd_quantile((prob - a_hi) / (1.0 - a_hi), f.tail_hi);
  }
  const auto& lv = f.central.levels;
  const auto& qv = f.central.values;
  const double* begin = lv.data();
  const double* end = lv.data() + lv.size();
  const Eigen::Index hi = std::min<Eigen::Index>(std::upper_bound(begin, end, prob) - begin, lv.size() - 1);
  const Eigen::Index lo = hi - 1;
  const double t = (prob - lv[lo]) / (lv[hi] - lv[lo]);
  return qv[lo] + t * (qv[hi] - qv[lo]);
}

}  // namespace netload
