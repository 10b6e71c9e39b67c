#pragma once

// Linear quantile regression on mean-model residuals. The default solver is
// a primal-dual interior point method (Mehrotra predictor-corrector) on the
// bounded-variable LP dual
//
//   max y'a   s.t.  X'a = (1-alpha) X'1,  a in [0,1]^n,
//
// whose equality multipliers recover the regression coefficients. Iteration
// stops when the primal pinball objective is within 1e-8 relative of the LP
// dual bound, which certifies the documented tolerance. Intercept-only
// designs are solved exactly by the sample quantile under the lower
// convention (the smallest optimizer of the LP, index ceil(alpha*n) of the
// sorted sample).

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netload/spliced.hpp"

namespace netload {

struct QuantRegOptions {
  double tol = 1e-8;           // relative primal-dual gap
  int max_iter = 100;
  double step_factor = 0.99995;
};

// Sample quantile, lower-interpolation convention.
double empirical_quantile_lower(Eigen::VectorXd values, double alpha);

// Minimizes sum_i (q_i - y_i)(1(y_i <= q_i) - alpha) over q_i = b0 + B_i'b.
// B holds the features only; the intercept is prepended internally, so the
// result has 1 + B.cols() entries. Requires n > 10 * (1 + B.cols()) and
// alpha in (0,1). Throws ConvergenceError past the iteration cap.
Eigen::VectorXd fit_quantile(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& B, double alpha,
                             const QuantRegOptions& opts = {});

double pinball_objective(const Eigen::VectorXd& residuals, const Eigen::VectorXd& fitted, double alpha);

struct QuantileModel {
  Eigen::VectorXd levels;               // strictly increasing, in (0,1)
  Eigen::MatrixXd coef;                 // (1 + |B|) x levels, intercept row first
  std::vector<std::string> feature_names;
};

QuantileModel fit_quantile_model(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& levels, std::vector<std::string> feature_names,
                                 const QuantRegOptions& opts = {});

// q_{level,t} = yhat_t + [1 B_t] coef_level, then per-row ascending sort
// (rearrangement) so curves never cross. Rows with a non-finite yhat or
// feature come back as NaN.
Eigen::MatrixXd predict_quantiles(const QuantileModel& model, const Eigen::VectorXd& yhat,
                                  const Eigen::MatrixXd& B);

QuantileCurve curve_from_row(const Eigen::VectorXd& levels, const Eigen::VectorXd& row);

}  // namespace netload
