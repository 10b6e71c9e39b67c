#pragma once

// Penalized spline-basis regression for the deterministic net-load forecast.
// Smoothing weight selection is K-fold cross-validated MSE over a shared
// multiplier grid; the full design-level fit is exposed for testing, plus a
// TimeTable-level wrapper that owns the basis.
//
// Identifiability: every penalized block is fitted under a sum-to-zero
// constraint over the training rows (the block's column-sum direction is
// projected out), so smooth terms never compete with the intercept or with
// category main effects. Coefficients are reported in the full
// parametrization, where the constraint is already baked in.

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "netload/basis.hpp"
#include "netload/timetable.hpp"

namespace netload {

struct PenalizedFitOptions {
  Eigen::VectorXd lambda_grid;  // shared multiplier grid; empty => default 10 log-spaced 1e-2..1e6
  int cv_folds = 3;
  double ridge_floor = 1e-10;  // relative diagonal floor on penalized blocks

  static Eigen::VectorXd default_grid();
};

struct PenalizedFit {
  Eigen::VectorXd coef;  // full parametrization, aligned with DesignMatrix columns
  double lambda = 0.0;
  Eigen::VectorXd lambda_grid;
  Eigen::VectorXd cv_mse;  // aligned with lambda_grid; empty when the grid had one entry
  Eigen::Index n_used = 0;
};

// Rows with missing y or an invalid design row are excluded. Throws
// ValidationError when the unpenalized columns are rank deficient (the
// message names the collinear columns) or when too few rows remain.
PenalizedFit fit_penalized(const DesignMatrix& design, const Eigen::VectorXd& y,
                           const PenalizedFitOptions& opts = {});

struct FittedMeanModel {
  BasisSpec spec;
  FittedBasis basis;
  Eigen::VectorXd coef;
  double lambda = 0.0;
  Eigen::VectorXd lambda_grid;
  Eigen::VectorXd cv_mse;
  std::int64_t train_start = 0, train_end = 0;
  std::string target;
};

FittedMeanModel fit_mean_model(const TimeTable& train, const BasisSpec& spec, const std::string& target,
                               const PenalizedFitOptions& opts = {});

// Deterministic forecast for every row; NaN where a needed feature is
// missing.
Eigen::VectorXd predict_mean(const FittedMeanModel& model, const TimeTable& table);

// Contribution of a single term (intercept excluded); for inspecting fitted
// component shapes.
Eigen::VectorXd predict_term(const FittedMeanModel& model, const TimeTable& table, std::size_t term_index);

}  // namespace netload
