#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netload/spliced.hpp"
#include "testutil.hpp"

using netload::GpdParams;
using netload::QuantileCurve;
using netload::SplicedForecast;
using netload::spliced_cdf;
using netload::spliced_quantile;

namespace {

SplicedForecast make_forecast() {
  Eigen::VectorXd levels(5), values(5);
  levels << 0.025, 0.25, 0.5, 0.75, 0.975;
  values << -2.0, -0.7, 0.1, 0.9, 2.2;
  return SplicedForecast(QuantileCurve(levels, values), GpdParams<double>(0.8, 0.15), GpdParams<double>(0.6, 0.1));
}

SplicedForecast random_forecast(std::mt19937_64& rng) {
  const int n = 3 + static_cast<int>(rng() % 9);
  Eigen::VectorXd levels(n), values(n);
  // strictly increasing levels straddling 0.5
  levels[0] = 0.005 + 0.09 * testutil::uniform(rng);
  levels[n - 1] = 0.905 + 0.09 * testutil::uniform(rng);
  for (int i = 1; i < n - 1; ++i) levels[i] = 0.15 + 0.7 * (i - 0.5 + 0.4 * testutil::uniform(rng)) / (n - 2);
  std::sort(levels.data(), levels.data() + n);
  values[0] = -3.0 * testutil::uniform(rng) - 0.5;
  for (int i = 1; i < n; ++i) values[i] = values[i - 1] + 1.5 * testutil::uniform(rng) + 1e-3;
  const GpdParams<double> lo(0.1 + 2.0 * testutil::uniform(rng), -0.4 + 0.8 * testutil::uniform(rng));
  const GpdParams<double> hi(0.1 + 2.0 * testutil::uniform(rng), -0.4 + 0.8 * testutil::uniform(rng));
  return SplicedForecast(QuantileCurve(levels, values), lo, hi);
}

}  // namespace

TEST_CASE("invariant validation") {
  Eigen::VectorXd levels(2), values(2);
  levels << 0.3, 0.2;
  values << 0.0, 1.0;
  CHECK_THROWS_AS(QuantileCurve(levels, values), std::invalid_argument);
  levels << 0.2, 0.3;
  values << 1.0, 0.0;
  CHECK_THROWS_AS(QuantileCurve(levels, values), std::invalid_argument);
  values << 0.0, 1.0;
  // alpha_hi must exceed 0.5
  CHECK_THROWS_AS(SplicedForecast(QuantileCurve(levels, values), GpdParams<double>(1.0, 0.0),
                                  GpdParams<double>(1.0, 0.0)),
                  std::invalid_argument);
}

TEST_CASE("central knots and junctions are exact") {
  const auto f = make_forecast();
  CHECK(spliced_cdf(0.1, f) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(spliced_cdf(-2.0, f) == doctest::Approx(0.025).epsilon(1e-12));
  CHECK(spliced_cdf(2.2, f) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(spliced_quantile(0.025, f) == doctest::Approx(-2.0));
  CHECK(spliced_quantile(0.975, f) == doctest::Approx(2.2));
  for (int i = 0; i < f.central.levels.size(); ++i) {
    CHECK(spliced_quantile(f.central.levels[i], f) == doctest::Approx(f.central.values[i]).epsilon(1e-12));
  }
}

TEST_CASE("deep lower tail composes the branch formula") {
  const auto f = make_forecast();
  for (double y : {-2.5, -4.0, -9.0}) {
    const double expected = f.alpha_lo() * (1.0 - netload::gpd_cdf(f.q_lo() - y, f.tail_lo));
    CHECK(spliced_cdf(y, f) == doctest::Approx(expected).epsilon(1e-14));
  }
  // algebraic inversion of the lower branch, cross-checked against bisection
  const double prob = 0.0005;
  const double expected_q = f.q_lo() - netload::gpd_quantile(1.0 - prob / f.alpha_lo(), f.tail_lo);
  CHECK(spliced_quantile(prob, f) == doctest::Approx(expected_q).epsilon(1e-12));
  const double oracle =
      testutil::bisect_inverse([&](double y) { return spliced_cdf(y, f); }, prob, -1e3, f.q_lo());
  CHECK(spliced_quantile(prob, f) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("junction continuity") {
  const auto f = make_forecast();
  const double eps = 1e-8;
  CHECK(std::fabs(spliced_cdf(f.q_lo() - eps, f) - f.alpha_lo()) < 1e-6);
  CHECK(std::fabs(spliced_cdf(f.q_lo() + eps, f) - f.alpha_lo()) < 1e-6);
  CHECK(std::fabs(spliced_cdf(f.q_hi() - eps, f) - f.alpha_hi()) < 1e-6);
  CHECK(std::fabs(spliced_cdf(f.q_hi() + eps, f) - f.alpha_hi()) < 1e-6);
}

TEST_CASE("cdf/quantile bijection and monotonicity on random forecasts") {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 100; ++rep) {
    const auto f = random_forecast(rng);
    for (int k = 1; k < 400; ++k) {
      const double p = k / 400.0;
      const double q = spliced_quantile(p, f);
      CHECK(std::fabs(spliced_cdf(q, f) - p) < 1e-9);
    }
    double prev = -1.0;
    const double span = f.q_hi() - f.q_lo() + 4.0;
    for (int k = 0; k < 2000; ++k) {
      const double y = f.q_lo() - 2.0 + span * k / 1999.0;
      const double c = spliced_cdf(y, f);
      CHECK(c >= prev);
      prev = c;
    }
  }
}
