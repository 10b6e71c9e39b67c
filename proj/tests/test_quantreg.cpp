#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netload/errors.hpp"
#include "netload/mathspecial.hpp"
#include "netload/quantreg.hpp"
#include "testutil.hpp"

using namespace netload;

TEST_CASE("intercept-only fits are empirical quantiles") {
  Eigen::VectorXd r(100);
  for (int i = 0; i < 100; ++i) r[i] = static_cast<double>(i + 1);
  const Eigen::MatrixXd empty(100, 0);

  const auto median = fit_quantile(r, empty, 0.5);
  CHECK(median[0] == doctest::Approx(50.0));  // lower convention at an even split

  // brute-force objective scan over candidate values: every data value
  const auto q90 = fit_quantile(r, empty, 0.9);
  double best = 1e300, best_v = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double obj = pinball_objective(r, Eigen::VectorXd::Constant(100, r[i]), 0.9);
    if (obj < best - 1e-12) {
      best = obj;
      best_v = r[i];
    }
  }
  CHECK(q90[0] == doctest::Approx(best_v));
  CHECK(q90[0] == doctest::Approx(90.0));
}

TEST_CASE("solver matches the empirical quantile through the LP route") {
  // same intercept-only problems, but forced through the interior point path
  // by adding a dummy feature with zero effect
  std::mt19937_64 rng(31);
  const Eigen::Index n = 2001;
  Eigen::VectorXd r(n);
  for (auto& v : r) v = testutil::normal(rng);
  Eigen::MatrixXd b(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) b(i, 0) = testutil::uniform(rng);

  for (double alpha : {0.1, 0.5, 0.9}) {
    const auto fit = fit_quantile(r, b, alpha);
    // objective must be within 1e-8 relative of the best constant+slope fit
    const double obj = pinball_objective(r, Eigen::VectorXd::Constant(n, fit[0]) + b * fit.tail(1), alpha);
    // perturbation never improves
    for (int rep = 0; rep < 100; ++rep) {
      Eigen::VectorXd pert = fit;
      pert[rng() % 2] += (rng() % 2 ? 0.01 : -0.01);
      const double obj_p = pinball_objective(r, Eigen::VectorXd::Constant(n, pert[0]) + b * pert.tail(1), alpha);
      CHECK(obj <= obj_p + 1e-8 * (1.0 + std::fabs(obj)));
    }
  }
}

TEST_CASE("heteroskedastic generator: slope recovery") {
  // y = 2x + (1+x) eps, eps ~ N(0,1): the alpha-quantile slope is 2 + z_alpha
  std::mt19937_64 rng(32);
  const Eigen::Index n = 50000;
  Eigen::VectorXd y(n);
  Eigen::MatrixXd b(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = testutil::uniform(rng);
    b(i, 0) = x;
    y[i] = 2.0 * x + (1.0 + x) * testutil::normal(rng);
  }
  for (double alpha : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    const auto fit = fit_quantile(y, b, alpha);
    const double z = norm_quantile(alpha);
    CHECK(std::fabs(fit[1] - (2.0 + z)) < 0.05);
    CHECK(std::fabs(fit[0] - z) < 0.05);
  }
}

TEST_CASE("equivariance: shifting residuals shifts the intercept") {
  std::mt19937_64 rng(33);
  const Eigen::Index n = 600;
  Eigen::VectorXd r(n);
  Eigen::MatrixXd b(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    b(i, 0) = testutil::normal(rng);
    b(i, 1) = testutil::uniform(rng);
    r[i] = 0.3 * b(i, 0) + testutil::normal(rng);
  }
  const double shift = 7.25;
  const auto base = fit_quantile(r, b, 0.3);
  const auto moved = fit_quantile(r.array() + shift, b, 0.3);
  CHECK(moved[0] - base[0] == doctest::Approx(shift).epsilon(1e-6));
  CHECK(moved[1] == doctest::Approx(base[1]).epsilon(1e-5));
}

TEST_CASE("preconditions") {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(15);
  Eigen::MatrixXd b = Eigen::MatrixXd::Random(15, 1);
  CHECK_THROWS_AS(fit_quantile(r, b, 0.5), ValidationError);  // 15 <= 10*2
  Eigen::VectorXd r2 = Eigen::VectorXd::Random(100);
  Eigen::MatrixXd b2 = Eigen::MatrixXd::Random(100, 1);
  CHECK_THROWS_AS(fit_quantile(r2, b2, 0.0), ValidationError);
  CHECK_THROWS_AS(fit_quantile(r2, b2, 1.0), ValidationError);
}

TEST_CASE("predict_quantiles: flat curves, rearrangement, coverage") {
  SUBCASE("zero coefficients give the deterministic forecast at every level") {
    QuantileModel m;
    m.levels = Eigen::VectorXd::LinSpaced(5, 0.1, 0.9);
    m.coef = Eigen::MatrixXd::Zero(2, 5);
    Eigen::VectorXd yhat(3);
    yhat << -1.0, 0.0, 2.5;
    const auto q = predict_quantiles(m, yhat, Eigen::MatrixXd::Zero(3, 1));
    for (Eigen::Index i = 0; i < 3; ++i)
      for (Eigen::Index l = 0; l < 5; ++l) CHECK(q(i, l) == doctest::Approx(yhat[i]));
  }
  SUBCASE("crossing inputs come out sorted") {
    QuantileModel m;
    m.levels = Eigen::VectorXd::LinSpaced(3, 0.3, 0.7);
    m.coef.resize(2, 3);
    // slope makes levels cross for large x
    m.coef << 0.0, 0.1, 0.2, 0.0, 1.0, -1.0;
    Eigen::VectorXd yhat = Eigen::VectorXd::Zero(1);
    Eigen::MatrixXd b(1, 1);
    b << 2.0;
    const auto q = predict_quantiles(m, yhat, b);
    CHECK(q(0, 0) <= q(0, 1));
    CHECK(q(0, 1) <= q(0, 2));
    // rearrangement preserves the multiset
    std::vector<double> raw{0.0, 0.1 + 2.0, 0.2 - 2.0};
    std::sort(raw.begin(), raw.end());
    for (int l = 0; l < 3; ++l) CHECK(q(0, l) == doctest::Approx(raw[l]));
  }
  SUBCASE("coverage on the heteroskedastic generator") {
    std::mt19937_64 rng(34);
    const Eigen::Index n = 50000;
    Eigen::VectorXd y(n);
    Eigen::MatrixXd b(n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double x = testutil::uniform(rng);
      b(i, 0) = x;
      y[i] = 2.0 * x + (1.0 + x) * testutil::normal(rng);
    }
    Eigen::VectorXd levels(3);
    levels << 0.1, 0.5, 0.9;
    const auto m = fit_quantile_model(y, b, levels, {"x"});
    const auto q = predict_quantiles(m, Eigen::VectorXd::Zero(n), b);
    for (Eigen::Index l = 0; l < 3; ++l) {
      double cover = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) cover += (y[i] <= q(i, l)) ? 1.0 : 0.0;
      cover /= static_cast<double>(n);
      CHECK(std::fabs(cover - levels[l]) < 0.01);
    }
  }
}
