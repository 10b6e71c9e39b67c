#include "netload/meanmodel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "netload/errors.hpp"

namespace netload {

Eigen::VectorXd PenalizedFitOptions::default_grid() {
  Eigen::VectorXd g(10);
  for (int i = 0; i < 10; ++i) g[i] = std::pow(10.0, -2.0 + 8.0 * i / 9.0);
  return g;
}

namespace {

// Orthonormal basis of the complement of c (K x (K-1)), via a Householder
// reflection mapping c onto e1.
Eigen::MatrixXd null_space_basis(const Eigen::VectorXd& c) {
  const Eigen::Index k = c.size();
  Eigen::VectorXd v = c;
  v[0] += (c[0] >= 0.0 ? 1.0 : -1.0) * c.norm();
  const double vn2 = v.squaredNorm();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(k, k);
  if (vn2 > 0.0) h -= (2.0 / vn2) * (v * v.transpose());
  return h.rightCols(k - 1);
}

struct ConstrainedDesign {
  Eigen::MatrixXd X;                      // used rows x reduced columns
  Eigen::VectorXd y;                      // used rows
  std::vector<Eigen::MatrixXd> z;         // per penalty block (possibly identity)
  std::vector<Eigen::Index> new_offset;   // block offsets in reduced columns
  std::vector<Eigen::Index> new_width;
  std::vector<Eigen::Index> col_map;      // reduced column -> original column (-1 inside blocks)
  std::vector<Eigen::Index> unpen_cols;   // reduced indices of unpenalized columns
};

ConstrainedDesign constrain(const DesignMatrix& dm, const Eigen::VectorXd& y,
                            const std::vector<Eigen::Index>& used) {
  const Eigen::Index n = static_cast<Eigen::Index>(used.size());
  ConstrainedDesign out;

  std::vector<bool> in_block(dm.X.cols(), false);
  for (const auto& pb : dm.penalties) {
    for (Eigen::Index c = 0; c < pb.penalty.rows(); ++c) in_block[pb.offset + c] = true;
  }

  // column-sum constraint per block over the used rows
  std::vector<Eigen::Index> reduced_of(dm.X.cols(), -1);
  Eigen::Index p_red = 0;
  for (Eigen::Index c = 0; c < dm.X.cols(); ++c) {
    if (!in_block[c]) reduced_of[c] = p_red++;
  }
  for (const auto& pb : dm.penalties) {
    const Eigen::Index k = pb.penalty.rows();
    Eigen::VectorXd csum = Eigen::VectorXd::Zero(k);
    for (Eigen::Index r : used) csum += dm.X.row(r).segment(pb.offset, k).transpose();
    Eigen::MatrixXd z;
    if (csum.norm() < 1e-12) {
      z = Eigen::MatrixXd::Identity(k, k);
    } else {
      z = null_space_basis(csum);
    }
    out.z.push_back(z);
    out.new_offset.push_back(p_red);
    out.new_width.push_back(z.cols());
    p_red += z.cols();
  }

  out.X.resize(n, p_red);
  out.y.resize(n);
  out.col_map.assign(p_red, -1);
  for (Eigen::Index c = 0; c < dm.X.cols(); ++c) {
    if (reduced_of[c] >= 0) out.col_map[reduced_of[c]] = c;
  }
  for (Eigen::Index i = 0; i < n; ++i) out.y[i] = y[used[i]];
  for (Eigen::Index c = 0; c < dm.X.cols(); ++c) {
    if (reduced_of[c] < 0) continue;
    for (Eigen::Index i = 0; i < n; ++i) out.X(i, reduced_of[c]) = dm.X(used[i], c);
  }
  for (std::size_t b = 0; b < dm.penalties.size(); ++b) {
    const auto& pb = dm.penalties[b];
    const Eigen::Index k = pb.penalty.rows();
    Eigen::MatrixXd block(n, k);
    for (Eigen::Index i = 0; i < n; ++i) block.row(i) = dm.X.row(used[i]).segment(pb.offset, k);
    out.X.middleCols(out.new_offset[b], out.new_width[b]) = block * out.z[b];
  }
  for (Eigen::Index c : dm.unpenalized) out.unpen_cols.push_back(reduced_of[c]);
  return out;
}

void check_unpenalized_rank(const ConstrainedDesign& cd, const DesignMatrix& dm) {
  const Eigen::Index pu = static_cast<Eigen::Index>(cd.unpen_cols.size());
  Eigen::MatrixXd xu(cd.X.rows(), pu);
  for (Eigen::Index j = 0; j < pu; ++j) xu.col(j) = cd.X.col(cd.unpen_cols[j]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xu);
  qr.setThreshold(1e-9);
  const Eigen::Index rank = qr.rank();
  if (rank < pu) {
    const auto perm = qr.colsPermutation().indices();
    std::string cols;
    for (Eigen::Index j = rank; j < pu; ++j) {
      const Eigen::Index orig = cd.col_map[cd.unpen_cols[perm[j]]];
      if (!cols.empty()) cols += ", ";
      cols += dm.names[orig];
    }
    throw ValidationError("fit_penalized: unpenalized columns are rank deficient; collinear: " + cols);
  }
}

Eigen::MatrixXd penalty_matrix(const ConstrainedDesign& cd, const DesignMatrix& dm, Eigen::Index p_red) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(p_red, p_red);
  for (std::size_t b = 0; b < dm.penalties.size(); ++b) {
    const Eigen::MatrixXd sb = cd.z[b].transpose() * dm.penalties[b].penalty * cd.z[b];
    s.block(cd.new_offset[b], cd.new_offset[b], cd.new_width[b], cd.new_width[b]) += sb;
  }
  return s;
}

Eigen::MatrixXd ridge_matrix(const ConstrainedDesign& cd, const Eigen::MatrixXd& gram, double rel,
                             Eigen::Index p_red) {
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(p_red, p_red);
  for (std::size_t b = 0; b < cd.new_offset.size(); ++b) {
    double scale = 0.0;
    for (Eigen::Index c = 0; c < cd.new_width[b]; ++c) scale += gram(cd.new_offset[b] + c, cd.new_offset[b] + c);
    scale = (cd.new_width[b] > 0) ? scale / static_cast<double>(cd.new_width[b]) : 1.0;
    for (Eigen::Index c = 0; c < cd.new_width[b]; ++c)
      r(cd.new_offset[b] + c, cd.new_offset[b] + c) = rel * std::max(scale, 1.0);
  }
  return r;
}

}  // namespace

PenalizedFit fit_penalized(const DesignMatrix& dm, const Eigen::VectorXd& y, const PenalizedFitOptions& opts) {
  if (y.size() != dm.X.rows()) throw ValidationError("fit_penalized: y length does not match design");
  std::vector<Eigen::Index> used;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (dm.row_valid[i] && !TimeTable::is_missing(y[i])) used.push_back(i);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(used.size());
  if (n <= static_cast<Eigen::Index>(dm.unpenalized.size()))
    throw ValidationError("fit_penalized: fewer usable rows than unpenalized columns");

  ConstrainedDesign cd = constrain(dm, y, used);
  check_unpenalized_rank(cd, dm);
  const Eigen::Index p = cd.X.cols();

  const Eigen::MatrixXd gram = cd.X.transpose() * cd.X;
  const Eigen::VectorXd rhs = cd.X.transpose() * cd.y;
  const Eigen::MatrixXd s = penalty_matrix(cd, dm, p);
  const Eigen::MatrixXd ridge = ridge_matrix(cd, gram, opts.ridge_floor, p);

  Eigen::VectorXd grid = opts.lambda_grid.size() ? opts.lambda_grid : PenalizedFitOptions::default_grid();
  PenalizedFit fit;
  fit.lambda_grid = grid;
  fit.n_used = n;

  double chosen = grid[0];
  if (grid.size() > 1 && !dm.penalties.empty()) {
    const int folds = std::max(2, opts.cv_folds);
    std::vector<Eigen::MatrixXd> gram_f(folds);
    std::vector<Eigen::VectorXd> rhs_f(folds);
    std::vector<std::pair<Eigen::Index, Eigen::Index>> span_f(folds);
    for (int f = 0; f < folds; ++f) {
      const Eigen::Index lo = n * f / folds, hi = n * (f + 1) / folds;
      span_f[f] = {lo, hi - lo};
      const auto xf = cd.X.middleRows(lo, hi - lo);
      gram_f[f] = xf.transpose() * xf;
      rhs_f[f] = xf.transpose() * cd.y.segment(lo, hi - lo);
    }
    fit.cv_mse = Eigen::VectorXd::Zero(grid.size());
    for (Eigen::Index g = 0; g < grid.size(); ++g) {
      double sse = 0.0;
      for (int f = 0; f < folds; ++f) {
        const Eigen::MatrixXd a = gram - gram_f[f] + grid[g] * s + ridge;
        const Eigen::VectorXd beta = Eigen::LDLT<Eigen::MatrixXd>(a).solve(rhs - rhs_f[f]);
        const auto xf = cd.X.middleRows(span_f[f].first, span_f[f].second);
        sse += (xf * beta - cd.y.segment(span_f[f].first, span_f[f].second)).squaredNorm();
      }
      fit.cv_mse[g] = sse / static_cast<double>(n);
    }
    Eigen::Index best = 0;
    fit.cv_mse.minCoeff(&best);
    chosen = grid[best];
  }

  const Eigen::MatrixXd a = gram + chosen * s + ridge;
  const Eigen::VectorXd beta_red = Eigen::LDLT<Eigen::MatrixXd>(a).solve(rhs);

  // back to the full parametrization
  fit.coef = Eigen::VectorXd::Zero(dm.X.cols());
  for (Eigen::Index c = 0; c < p; ++c) {
    if (cd.col_map[c] >= 0) fit.coef[cd.col_map[c]] = beta_red[c];
  }
  for (std::size_t b = 0; b < dm.penalties.size(); ++b) {
    const Eigen::VectorXd gamma = beta_red.segment(cd.new_offset[b], cd.new_width[b]);
    fit.coef.segment(dm.penalties[b].offset, dm.penalties[b].penalty.rows()) = cd.z[b] * gamma;
  }
  fit.lambda = chosen;
  return fit;
}

FittedMeanModel fit_mean_model(const TimeTable& train, const BasisSpec& spec, const std::string& target,
                               const PenalizedFitOptions& opts) {
  FittedMeanModel m;
  m.spec = spec;
  m.target = target;
  m.basis = fit_basis(train, spec);
  const DesignMatrix dm = build_design(train, m.basis);
  const PenalizedFit fit = fit_penalized(dm, train.column(target), opts);
  m.coef = fit.coef;
  m.lambda = fit.lambda;
  m.lambda_grid = fit.lambda_grid;
  m.cv_mse = fit.cv_mse;
  if (!train.times().empty()) {
    m.train_start = train.times().front();
    m.train_end = train.times().back() + kStepSeconds;
  }
  return m;
}

Eigen::VectorXd predict_mean(const FittedMeanModel& model, const TimeTable& table) {
  const DesignMatrix dm = build_design(table, model.basis);
  Eigen::VectorXd out(table.rows());
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    out[i] = dm.row_valid[i] ? dm.X.row(i).dot(model.coef) : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

Eigen::VectorXd predict_term(const FittedMeanModel& model, const TimeTable& table, std::size_t term_index) {
  if (term_index >= model.basis.terms.size()) throw ValidationError("predict_term: bad term index");
  const DesignMatrix dm = build_design(table, model.basis);
  const auto& ft = model.basis.terms[term_index];
  Eigen::VectorXd out(table.rows());
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    out[i] = dm.row_valid[i]
                 ? dm.X.row(i).segment(ft.offset, ft.width).dot(model.coef.segment(ft.offset, ft.width))
                 : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace netload
