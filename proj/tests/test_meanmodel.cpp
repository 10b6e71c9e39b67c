#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "netload/errors.hpp"
#include "netload/features.hpp"
#include "netload/meanmodel.hpp"
#include "testutil.hpp"

using namespace netload;

namespace {

TimeTable table_with(const std::vector<std::pair<std::string, Eigen::VectorXd>>& cols) {
  const Eigen::Index n = cols.front().second.size();
  std::vector<std::int64_t> times(n);
  for (Eigen::Index i = 0; i < n; ++i) times[i] = i * kStepSeconds;
  std::vector<std::string> names;
  Eigen::MatrixXd data(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    names.push_back(cols[c].first);
    data.col(static_cast<Eigen::Index>(c)) = cols[c].second;
  }
  return TimeTable(std::move(times), std::move(names), std::move(data));
}

PenalizedFitOptions fixed_lambda(double lam) {
  PenalizedFitOptions o;
  o.lambda_grid = Eigen::VectorXd::Constant(1, lam);
  return o;
}

}  // namespace

TEST_CASE("lambda = 0 with full-rank design reproduces OLS") {
  std::mt19937_64 rng(21);
  const Eigen::Index n = 300;
  Eigen::VectorXd x(n), g(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = testutil::normal(rng);
    g[i] = static_cast<double>(i % 4);
    y[i] = 1.0 + 0.5 * x[i] + 0.2 * g[i] + 0.1 * testutil::normal(rng);
  }
  auto table = table_with({{"x", x}, {"g", g}});
  const auto dm = build_design(table, BasisSpec().poly("x", 3).dummy("g"));
  const auto fit = fit_penalized(dm, y, fixed_lambda(0.0));

  // normal-equations oracle
  const Eigen::VectorXd beta_ols =
      (dm.X.transpose() * dm.X).ldlt().solve(dm.X.transpose() * y);
  CHECK((fit.coef - beta_ols).norm() / beta_ols.norm() < 1e-8);

  // in-sample residuals orthogonal to unpenalized columns
  const Eigen::VectorXd r = y - dm.X * fit.coef;
  for (Eigen::Index c : dm.unpenalized) {
    CHECK(std::fabs(dm.X.col(c).dot(r)) < 1e-6 * static_cast<double>(n));
  }
}

TEST_CASE("huge lambda drives a spline component affine") {
  std::mt19937_64 rng(22);
  const Eigen::Index n = 2000;
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = 4.0 * testutil::uniform(rng);
    y[i] = std::sin(x[i] * 2.0) + 0.05 * testutil::normal(rng);
  }
  auto table2 = table_with({{"x", x}}).with_column("y", y);
  const auto model2 = fit_mean_model(table2, BasisSpec().spline("x", 10), "y", fixed_lambda(1e12));
  const Eigen::VectorXd comp = predict_term(model2, table2, 0);
  // second differences of the component along x should vanish
  std::vector<std::pair<double, double>> pts;
  for (Eigen::Index i = 0; i < n; ++i) pts.emplace_back(x[i], comp[i]);
  std::sort(pts.begin(), pts.end());
  // fit an affine model to the component and look at the residual
  Eigen::MatrixXd a(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = 1.0;
    a(i, 1) = pts[i].first;
    b[i] = pts[i].second;
  }
  const Eigen::VectorXd ab = (a.transpose() * a).ldlt().solve(a.transpose() * b);
  CHECK((b - a * ab).lpNorm<Eigen::Infinity>() < 1e-4);
}

TEST_CASE("simulation: smooth recovery beats the noise floor") {
  std::mt19937_64 rng(23);
  const Eigen::Index n = 5000;
  const double noise_sd = 0.3;
  Eigen::VectorXd x(n), y(n), truth(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = 6.0 * testutil::uniform(rng) - 3.0;
    truth[i] = std::sin(1.7 * x[i]) + 0.3 * x[i];
    y[i] = truth[i] + noise_sd * testutil::normal(rng);
  }
  auto table = table_with({{"x", x}}).with_column("y", y);
  const auto model = fit_mean_model(table, BasisSpec().spline("x", 12), "y", {});
  const Eigen::VectorXd pred = predict_mean(model, table);
  const double rmse = std::sqrt((pred - truth).squaredNorm() / static_cast<double>(n));
  CHECK(rmse < noise_sd);
  CHECK(rmse < 0.05);  // smooth signal, plenty of data
}

TEST_CASE("rank-deficient unpenalized block names the collinear columns") {
  std::mt19937_64 rng(24);
  const Eigen::Index n = 100;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = testutil::normal(rng);
  auto table = table_with({{"x", x}, {"x_copy", x}});
  const auto dm = build_design(table, BasisSpec().linear("x").linear("x_copy"));
  Eigen::VectorXd y = x;
  try {
    fit_penalized(dm, y, fixed_lambda(0.0));
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("x_copy") != std::string::npos);
  }
}

TEST_CASE("training MSE is non-decreasing in the shared multiplier") {
  std::mt19937_64 rng(25);
  const Eigen::Index n = 1500;
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = testutil::uniform(rng);
    y[i] = std::cos(8.0 * x[i]) + 0.2 * testutil::normal(rng);
  }
  auto table = table_with({{"x", x}});
  const auto dm = build_design(table, BasisSpec().spline("x", 14));
  double prev = -1.0;
  for (double lam : {0.0, 1e-2, 1e0, 1e2, 1e4, 1e8}) {
    const auto fit = fit_penalized(dm, y, fixed_lambda(lam));
    const double mse = (y - dm.X * fit.coef).squaredNorm() / static_cast<double>(n);
    CHECK(mse >= prev - 1e-12);
    prev = mse;
  }
}

TEST_CASE("translation consistency: standardize, fit, invert == fit raw") {
  std::mt19937_64 rng(26);
  const Eigen::Index n = 1200;
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = 2.0 * testutil::uniform(rng);
    y[i] = 50.0 + 4.0 * std::sin(3.0 * x[i]) + 0.5 * testutil::normal(rng);
  }
  auto table = table_with({{"x", x}}).with_column("y", y);

  PenalizedFitOptions opts;  // CV over the default grid both times
  const auto raw_model = fit_mean_model(table, BasisSpec().spline("x", 10), "y", opts);
  const Eigen::VectorXd raw_pred = predict_mean(raw_model, table);

  const auto s = fit_standardizer(table, "y", 0, n * kStepSeconds);
  auto ztable = apply_standardizer(table, s, "y");
  const auto z_model = fit_mean_model(ztable, BasisSpec().spline("x", 10), "y", opts);
  const Eigen::VectorXd z_pred = predict_mean(z_model, ztable);
  for (Eigen::Index i = 0; i < n; ++i) {
    CHECK(s.invert(z_pred[i]) == doctest::Approx(raw_pred[i]).epsilon(1e-6));
  }
}

TEST_CASE("prediction consistency") {
  std::mt19937_64 rng(27);
  const Eigen::Index n = 400;
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = testutil::normal(rng);
    y[i] = 2.0 * x[i] + testutil::normal(rng);
  }
  auto table = table_with({{"x", x}}).with_column("y", y);
  const auto model = fit_mean_model(table, BasisSpec().poly("x", 2), "y", fixed_lambda(0.0));

  // hand-assembled X beta on three rows
  const auto dm = build_design(table, model.basis);
  const Eigen::VectorXd pred = predict_mean(model, table);
  for (Eigen::Index i : {0, 5, 399}) {
    double acc = 0.0;
    for (Eigen::Index c = 0; c < dm.X.cols(); ++c) acc += dm.X(i, c) * model.coef[c];
    CHECK(pred[i] == doctest::Approx(acc).epsilon(1e-12));
  }

  // permuting rows permutes predictions identically
  std::vector<Eigen::Index> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::VectorXd xp(n);
  for (Eigen::Index i = 0; i < n; ++i) xp[i] = x[perm[i]];
  const Eigen::VectorXd pred_p = predict_mean(model, table_with({{"x", xp}}));
  for (Eigen::Index i = 0; i < n; ++i) CHECK(pred_p[i] == doctest::Approx(pred[perm[i]]).epsilon(1e-12));
}

TEST_CASE("cv selects a sensible lambda on wiggly truth") {
  std::mt19937_64 rng(28);
  const Eigen::Index n = 3000;
  Eigen::VectorXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = testutil::uniform(rng);
    y[i] = std::sin(12.0 * x[i]) + 0.3 * testutil::normal(rng);
  }
  auto table = table_with({{"x", x}}).with_column("y", y);
  const auto model = fit_mean_model(table, BasisSpec().spline("x", 20), "y", {});
  // a heavily smoothed fit cannot track sin(12x); CV must not pick the top
  CHECK(model.lambda < 1e5);
  const Eigen::VectorXd pred = predict_mean(model, table);
  double sse = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = std::sin(12.0 * x[i]);
    sse += (pred[i] - t) * (pred[i] - t);
  }
  CHECK(std::sqrt(sse / n) < 0.15);
}
