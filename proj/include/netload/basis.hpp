#pragma once

// Design-matrix construction for penalized basis regression. A BasisSpec is
// a declarative list of terms over TimeTable columns; fitting the basis
// learns knots and category levels from training data, after which designs
// can be rebuilt on any table.
//
// Term kinds:
//   linear       one column, the feature itself
//   dummy        reference-coded one-hot (levels - 1 columns)
//   poly(n)      x, x^2, ..., x^n
//   spline(K)    cubic B-spline with K basis functions, knots at evenly
//                spaced quantiles of the training feature, second-difference
//                penalty
//   bispline(K)  tensor product of two marginal cubic bases of dimension
//                floor(sqrt(K)) each, Kronecker second-difference penalties
//
// Any term may carry a `by` categorical column, giving one copy of the
// term's block per category level (smooth-by-factor and poly-by-factor
// interactions). `by` blocks for poly terms are reference-coded so a main
// effect of the same feature stays identifiable; spline `by` blocks keep all
// levels and rely on the fitter's sum-to-zero constraints.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netload/timetable.hpp"

namespace netload {

enum class TermKind { Linear, Dummy, Polynomial, Spline, BiSpline };

struct BasisTerm {
  TermKind kind = TermKind::Linear;
  std::string feature;
  std::string feature2;  // BiSpline only
  std::string by;        // optional categorical interaction
  int order = 0;         // Polynomial: degree; Spline/BiSpline: K
  bool quantile_feature = false;  // member of the quantile-regression set B
};

struct BasisSpec {
  std::vector<BasisTerm> terms;

  BasisSpec& linear(const std::string& f, bool qf = false) {
    terms.push_back({TermKind::Linear, f, "", "", 0, qf});
    return *this;
  }
  BasisSpec& dummy(const std::string& f, bool qf = false) {
    terms.push_back({TermKind::Dummy, f, "", "", 0, qf});
    return *this;
  }
  BasisSpec& poly(const std::string& f, int degree, const std::string& by = "", bool qf = false) {
    terms.push_back({TermKind::Polynomial, f, "", by, degree, qf});
    return *this;
  }
  BasisSpec& spline(const std::string& f, int k, const std::string& by = "", bool qf = false) {
    terms.push_back({TermKind::Spline, f, "", by, k, qf});
    return *this;
  }
  BasisSpec& bispline(const std::string& f1, const std::string& f2, int k, bool qf = false) {
    terms.push_back({TermKind::BiSpline, f1, f2, "", k, qf});
    return *this;
  }
};

// Evaluates all K cubic B-spline basis functions at x for a clamped knot
// vector (size K + 4). x outside [knots.front(), knots.back()] must be
// clamped by the caller.
Eigen::VectorXd bspline_basis_row(double x, const Eigen::VectorXd& knots);

// Clamped cubic knot vector with K - 4 interior knots at evenly spaced
// quantiles of the finite values of x. Duplicate quantiles are merged, which
// can lower the effective dimension below K.
Eigen::VectorXd quantile_knots(const Eigen::VectorXd& x, int k);

// Greville abscissae of a cubic knot vector: the K sites whose linear
// combinations reproduce affine functions exactly.
Eigen::VectorXd greville_abscissae(const Eigen::VectorXd& knots);

// S = D'D where D holds divided second differences over the Greville sites;
// for evenly spaced knots this is the plain [1,-2,1] second-difference
// matrix. Null space: coefficient vectors affine in the sites, i.e. smooth
// components that are affine in the feature.
Eigen::MatrixXd second_difference_penalty(const Eigen::VectorXd& greville);

struct FittedTerm {
  BasisTerm term;
  Eigen::VectorXd knots1, knots2;   // spline knot vectors (empty otherwise)
  std::vector<double> levels;       // Dummy: category levels, reference first
  std::vector<double> by_levels;    // levels of the `by` column
  Eigen::Index offset = 0, width = 0;  // column block in the assembled design
};

struct FittedBasis {
  std::vector<FittedTerm> terms;
  Eigen::Index cols = 1;  // total columns including the leading intercept
};

struct PenaltyBlock {
  Eigen::Index offset = 0;
  Eigen::MatrixXd penalty;  // width x width
};

struct DesignMatrix {
  Eigen::MatrixXd X;  // rows x cols, intercept first; invalid rows are NaN
  std::vector<std::string> names;
  std::vector<PenaltyBlock> penalties;
  std::vector<Eigen::Index> unpenalized;   // column indices incl. intercept
  Eigen::ArrayX<bool> row_valid;           // false when a needed feature is missing
  Eigen::Index n_clamped = 0;              // feature values clamped into knot range
  Eigen::Index n_unseen_levels = 0;        // category values unseen in training
};

FittedBasis fit_basis(const TimeTable& train, const BasisSpec& spec);
DesignMatrix build_design(const TimeTable& table, const FittedBasis& basis);

// Convenience: fit the basis on `table` and build its design in one step.
DesignMatrix build_design(const TimeTable& table, const BasisSpec& spec, FittedBasis* fitted_out = nullptr);

// The reduced linear feature set B for quantile regression: one column per
// quantile-flagged term (dummy terms expand to their reference-coded
// columns, every other kind contributes the raw feature).
struct QuantileFeatures {
  Eigen::MatrixXd B;
  std::vector<std::string> names;
  Eigen::ArrayX<bool> row_valid;
};
QuantileFeatures quantile_features(const TimeTable& table, const FittedBasis& basis);

}  // namespace netload
