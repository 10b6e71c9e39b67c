#include "netload/quantreg.hpp"

#include <algorithm>
#include <cmath>

#include "netload/errors.hpp"

namespace netload {

double empirical_quantile_lower(Eigen::VectorXd values, double alpha) {
  if (values.size() == 0) throw ValidationError("empirical_quantile_lower: empty sample");
  std::sort(values.data(), values.data() + values.size());
  const double pos = alpha * static_cast<double>(values.size());
  Eigen::Index idx = static_cast<Eigen::Index>(std::ceil(pos)) - 1;
  idx = std::max<Eigen::Index>(0, std::min(idx, values.size() - 1));
  return values[idx];
}

double pinball_objective(const Eigen::VectorXd& residuals, const Eigen::VectorXd& fitted, double alpha) {
  double obj = 0.0;
  for (Eigen::Index i = 0; i < residuals.size(); ++i) {
    const double u = residuals[i] - fitted[i];
    obj += (u >= 0.0) ? alpha * u : (alpha - 1.0) * u;
  }
  return obj;
}

Eigen::VectorXd fit_quantile(const Eigen::VectorXd& y, const Eigen::MatrixXd& B, double alpha,
                             const QuantRegOptions& opts) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("fit_quantile: alpha must be in (0,1)");
  const Eigen::Index n = y.size();
  const Eigen::Index p = B.cols() + 1;
  if (B.rows() != 0 && B.rows() != n) throw ValidationError("fit_quantile: residuals/design length mismatch");
  if (n <= 10 * p) throw ValidationError("fit_quantile: need more than 10 observations per coefficient");

  if (p == 1) {
    Eigen::VectorXd out(1);
    out[0] = empirical_quantile_lower(y, alpha);
    return out;
  }

  Eigen::MatrixXd x(n, p);
  x.col(0).setOnes();
  x.rightCols(p - 1) = B;

  // bounded-variable LP: min c'a, X'a = b, 0 <= a <= 1, with c = -y
  const Eigen::VectorXd c = -y;
  const double tau = alpha;

  Eigen::VectorXd a = Eigen::VectorXd::Constant(n, 1.0 - tau);
  Eigen::VectorXd s = Eigen::VectorXd::Constant(n, tau);
  Eigen::VectorXd w = (x.transpose() * x).ldlt().solve(x.transpose() * c);
  Eigen::VectorXd rc = c - x * w;
  const double delta = 1e-4 + 0.1 * rc.cwiseAbs().mean();
  Eigen::VectorXd z = rc.cwiseMax(0.0).array() + delta;
  Eigen::VectorXd v = (-rc).cwiseMax(0.0).array() + delta;

  const double y_shift = (1.0 - tau) * y.sum();  // dual objective offset

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    // convergence: primal pinball at beta = -w vs the LP dual bound
    // `a` stays feasible for the dual LP throughout, so y'a - shift is a
    // certified lower bound on the optimal pinball objective.
    const Eigen::VectorXd beta = -w;
    const double primal = pinball_objective(y, x * beta, tau);
    const double dual = y.dot(a) - y_shift;
    const double gap = primal - dual;
    if (gap <= opts.tol * (1.0 + std::fabs(primal))) {
      return beta;
    }

    const Eigen::ArrayXd inv_a = a.array().inverse();
    const Eigen::ArrayXd inv_s = s.array().inverse();
    const Eigen::VectorXd q = (z.array() * inv_a + v.array() * inv_s).inverse().matrix();

    const Eigen::MatrixXd xq = x.array().colwise() * q.array();
    const Eigen::MatrixXd m = x.transpose() * xq;  // X' Q X
    Eigen::LDLT<Eigen::MatrixXd> ldlt(m);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("fit_quantile: normal matrix not factorizable");

    // affine (predictor) direction, mu = 0
    Eigen::VectorXd g = -(z - v);
    Eigen::VectorXd dw = ldlt.solve(-(xq.transpose() * g));
    Eigen::VectorXd da = q.asDiagonal() * (x * dw + g);
    Eigen::VectorXd dz = -z - (z.array() * inv_a * da.array()).matrix();
    Eigen::VectorXd dv = -v + (v.array() * inv_s * da.array()).matrix();

    auto step_len = [&](const Eigen::VectorXd& pos1, const Eigen::VectorXd& dir1, const Eigen::VectorXd& pos2,
                        const Eigen::VectorXd& dir2) {
      double t = 1.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (dir1[i] < 0.0) t = std::min(t, -pos1[i] / dir1[i]);
        if (dir2[i] < 0.0) t = std::min(t, -pos2[i] / dir2[i]);
      }
      return t;
    };
    const double ap_aff = opts.step_factor * step_len(a, da, s, -da);
    const double ad_aff = opts.step_factor * step_len(z, dz, v, dv);

    const double mu = (a.dot(z) + s.dot(v)) / (2.0 * n);
    double mu_aff = (a + ap_aff * da).dot(z + ad_aff * dz) + (s - ap_aff * da).dot(v + ad_aff * dv);
    mu_aff /= 2.0 * n;
    const double sigma = std::pow(mu_aff / mu, 3.0);
    const double mu_t = sigma * mu;

    // corrector with second-order complementarity terms
    const Eigen::ArrayXd zeta = da.array() * dz.array();
    const Eigen::ArrayXd eta = (-da.array()) * dv.array();
    g = ((mu_t - zeta) * inv_a - (mu_t - eta) * inv_s).matrix() - (z - v);
    dw = ldlt.solve(-(xq.transpose() * g));
    da = q.asDiagonal() * (x * dw + g);
    dz = ((mu_t - zeta) * inv_a).matrix() - z - (z.array() * inv_a * da.array()).matrix();
    dv = ((mu_t - eta) * inv_s).matrix() - v + (v.array() * inv_s * da.array()).matrix();

    const double ap = opts.step_factor * step_len(a, da, s, -da);
    const double ad = opts.step_factor * step_len(z, dz, v, dv);
    a += ap * da;
    s -= ap * da;
    w += ad * dw;
    z += ad * dz;
    v += ad * dv;
  }
  throw ConvergenceError("fit_quantile: no convergence within iteration cap at alpha=" + std::to_string(alpha));
}

QuantileModel fit_quantile_model(const Eigen::VectorXd& residuals, const Eigen::MatrixXd& B,
                                 const Eigen::VectorXd& levels, std::vector<std::string> feature_names,
                                 const QuantRegOptions& opts) {
  QuantileModel m;
  m.levels = levels;
  m.feature_names = std::move(feature_names);
  m.coef.resize(B.cols() + 1, levels.size());
  for (Eigen::Index l = 0; l < levels.size(); ++l) {
    m.coef.col(l) = fit_quantile(residuals, B, levels[l], opts);
  }
  return m;
}

Eigen::MatrixXd predict_quantiles(const QuantileModel& model, const Eigen::VectorXd& yhat,
                                  const Eigen::MatrixXd& B) {
  const Eigen::Index n = yhat.size();
  if (B.rows() != n) throw ValidationError("predict_quantiles: yhat/design length mismatch");
  if (B.cols() + 1 != model.coef.rows()) throw ValidationError("predict_quantiles: feature dimension mismatch");
  const Eigen::Index nl = model.levels.size();
  Eigen::MatrixXd q(n, nl);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(yhat[i]) || !B.row(i).allFinite()) {
      q.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    Eigen::VectorXd row(nl);
    for (Eigen::Index l = 0; l < nl; ++l) {
      row[l] = yhat[i] + model.coef(0, l) + B.row(i).dot(model.coef.col(l).tail(B.cols()));
    }
    std::sort(row.data(), row.data() + nl);  // rearrangement
    q.row(i) = row;
  }
  return q;
}

QuantileCurve curve_from_row(const Eigen::VectorXd& levels, const Eigen::VectorXd& row) {
  return QuantileCurve(levels, row);
}

}  // namespace netload
