#include "netload/basis.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "netload/errors.hpp"

namespace netload {

namespace {

constexpr int kOrder = 4;  // cubic

// Linear-interpolation quantile of sorted data.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double idx = p * static_cast<double>(s.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(idx));
  const auto hi = std::min(lo + 1, s.size() - 1);
  const double t = idx - static_cast<double>(lo);
  return (1.0 - t) * s[lo] + t * s[hi];
}

std::vector<double> finite_sorted(const Eigen::VectorXd& x) {
  std::vector<double> v;
  v.reserve(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!TimeTable::is_missing(x[i])) v.push_back(x[i]);
  }
  std::sort(v.begin(), v.end());
  return v;
}

std::vector<double> distinct_levels(const Eigen::VectorXd& x) {
  std::set<double> s;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!TimeTable::is_missing(x[i])) s.insert(x[i]);
  }
  return std::vector<double>(s.begin(), s.end());
}

int level_index(const std::vector<double>& levels, double v) {
  const auto it = std::lower_bound(levels.begin(), levels.end(), v - 1e-9);
  if (it == levels.end() || std::fabs(*it - v) > 1e-9) return -1;
  return static_cast<int>(it - levels.begin());
}

int marginal_dim(int k) { return std::max(4, static_cast<int>(std::floor(std::sqrt(static_cast<double>(k))))); }

}  // namespace

Eigen::VectorXd quantile_knots(const Eigen::VectorXd& x, int k) {
  if (k < 4) throw ValidationError("spline dimension K must be >= 4");
  const auto s = finite_sorted(x);
  if (s.size() < 2 || s.front() == s.back())
    throw ValidationError("spline feature needs at least two distinct values");
  std::vector<double> interior;
  for (int j = 1; j <= k - 4; ++j) {
    interior.push_back(sorted_quantile(s, static_cast<double>(j) / static_cast<double>(k - 3)));
  }
  // merge duplicates and knots touching the boundary
  std::vector<double> uniq;
  for (double t : interior) {
    if (t <= s.front() || t >= s.back()) continue;
    if (uniq.empty() || t > uniq.back() + 1e-12 * (1.0 + std::fabs(t))) uniq.push_back(t);
  }
  Eigen::VectorXd knots(static_cast<Eigen::Index>(uniq.size()) + 2 * kOrder);
  for (int i = 0; i < kOrder; ++i) knots[i] = s.front();
  for (std::size_t i = 0; i < uniq.size(); ++i) knots[kOrder + static_cast<Eigen::Index>(i)] = uniq[i];
  for (int i = 0; i < kOrder; ++i) knots[knots.size() - 1 - i] = s.back();
  return knots;
}

Eigen::VectorXd bspline_basis_row(double x, const Eigen::VectorXd& knots) {
  const Eigen::Index n_basis = knots.size() - kOrder;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_basis);
  const double lo = knots[0], hi = knots[knots.size() - 1];
  if (x < lo) x = lo;
  if (x > hi) x = hi;

  // knot span: largest i with knots[i] <= x < knots[i+1]; at the right
  // boundary use the last non-empty span
  Eigen::Index span = kOrder - 1;
  while (span < n_basis - 1 && x >= knots[span + 1]) ++span;

  // de Boor / Cox triangular scheme for the kOrder non-zero functions
  double left[kOrder], right[kOrder], N[kOrder];
  N[0] = 1.0;
  for (int j = 1; j < kOrder; ++j) {
    left[j] = x - knots[span + 1 - j];
    right[j] = knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double den = right[r + 1] + left[j - r];
      const double temp = (den != 0.0) ? N[r] / den : 0.0;
      N[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    N[j] = saved;
  }
  for (int j = 0; j < kOrder; ++j) {
    const Eigen::Index idx = span - kOrder + 1 + j;
    if (idx >= 0 && idx < n_basis) out[idx] = N[j];
  }
  return out;
}

Eigen::VectorXd greville_abscissae(const Eigen::VectorXd& knots) {
  const Eigen::Index k = knots.size() - kOrder;
  Eigen::VectorXd g(k);
  for (Eigen::Index i = 0; i < k; ++i) g[i] = (knots[i + 1] + knots[i + 2] + knots[i + 3]) / 3.0;
  return g;
}

Eigen::MatrixXd second_difference_penalty(const Eigen::VectorXd& greville) {
  const Eigen::Index k = greville.size();
  if (k < 3) return Eigen::MatrixXd::Zero(k, k);
  // normalize weights by the mean spacing so the lambda scale matches the
  // evenly spaced [1,-2,1] case
  const double h = (greville[k - 1] - greville[0]) / static_cast<double>(k - 1);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(k - 2, k);
  for (Eigen::Index i = 0; i < k - 2; ++i) {
    const double w1 = h / (greville[i + 1] - greville[i]);
    const double w3 = h / (greville[i + 2] - greville[i + 1]);
    d(i, i) = w1;
    d(i, i + 1) = -(w1 + w3);
    d(i, i + 2) = w3;
  }
  return d.transpose() * d;
}

namespace {

Eigen::Index term_width(const FittedTerm& ft) {
  const auto& t = ft.term;
  Eigen::Index base = 0;
  switch (t.kind) {
    case TermKind::Linear:
      base = 1;
      break;
    case TermKind::Dummy:
      base = static_cast<Eigen::Index>(ft.levels.size()) - 1;
      break;
    case TermKind::Polynomial:
      base = t.order;
      break;
    case TermKind::Spline:
      base = ft.knots1.size() - kOrder;
      break;
    case TermKind::BiSpline:
      base = (ft.knots1.size() - kOrder) * (ft.knots2.size() - kOrder);
      break;
  }
  if (!t.by.empty()) {
    const auto n_by = static_cast<Eigen::Index>(ft.by_levels.size());
    // poly-by is reference-coded; spline-by keeps all levels
    base *= (t.kind == TermKind::Polynomial) ? n_by - 1 : n_by;
  }
  return base;
}

std::string term_label(const BasisTerm& t) {
  std::string s = t.feature;
  switch (t.kind) {
    case TermKind::Linear:
      break;
    case TermKind::Dummy:
      s += ".d";
      break;
    case TermKind::Polynomial:
      s += ".p" + std::to_string(t.order);
      break;
    case TermKind::Spline:
      s += ".s" + std::to_string(t.order);
      break;
    case TermKind::BiSpline:
      s += ":" + t.feature2 + ".bs" + std::to_string(t.order);
      break;
  }
  if (!t.by.empty()) s += ".by." + t.by;
  return s;
}

}  // namespace

FittedBasis fit_basis(const TimeTable& train, const BasisSpec& spec) {
  FittedBasis out;
  Eigen::Index offset = 1;  // intercept at column 0
  for (const auto& term : spec.terms) {
    FittedTerm ft;
    ft.term = term;
    switch (term.kind) {
      case TermKind::Linear:
        break;
      case TermKind::Polynomial:
        if (term.order < 1) throw ValidationError("polynomial degree must be >= 1 for " + term.feature);
        break;
      case TermKind::Dummy: {
        ft.levels = distinct_levels(train.column(term.feature));
        if (ft.levels.size() < 2)
          throw ValidationError("dummy term needs >= 2 levels in training data: " + term.feature);
        break;
      }
      case TermKind::Spline: {
        ft.knots1 = quantile_knots(train.column(term.feature), term.order);
        break;
      }
      case TermKind::BiSpline: {
        const int km = marginal_dim(term.order);
        ft.knots1 = quantile_knots(train.column(term.feature), km);
        ft.knots2 = quantile_knots(train.column(term.feature2), km);
        break;
      }
    }
    if (!term.by.empty()) {
      ft.by_levels = distinct_levels(train.column(term.by));
      if (ft.by_levels.size() < 2)
        throw ValidationError("by-column needs >= 2 levels in training data: " + term.by);
    }
    ft.offset = offset;
    ft.width = term_width(ft);
    offset += ft.width;
    out.terms.push_back(std::move(ft));
  }
  out.cols = offset;
  return out;
}

DesignMatrix build_design(const TimeTable& table, const FittedBasis& basis) {
  const Eigen::Index n = table.rows();
  DesignMatrix out;
  out.X = Eigen::MatrixXd::Zero(n, basis.cols);
  out.X.col(0).setOnes();
  out.names.assign(basis.cols, "");
  out.names[0] = "intercept";
  out.row_valid = Eigen::ArrayX<bool>::Constant(n, true);
  out.unpenalized.push_back(0);

  for (const auto& ft : basis.terms) {
    const auto& t = ft.term;
    const Eigen::VectorXd x = table.column(t.feature);
    Eigen::VectorXd x2, by;
    if (t.kind == TermKind::BiSpline) x2 = table.column(t.feature2);
    if (!t.by.empty()) by = table.column(t.by);

    // width of one un-replicated copy of this term's block
    Eigen::Index base_width = ft.width;
    Eigen::Index n_copies = 1;
    const bool by_ref = (t.kind == TermKind::Polynomial);
    if (!t.by.empty()) {
      n_copies = static_cast<Eigen::Index>(ft.by_levels.size()) - (by_ref ? 1 : 0);
      base_width = ft.width / n_copies;
    }
    const std::string label = term_label(t);
    for (Eigen::Index c = 0; c < ft.width; ++c) out.names[ft.offset + c] = label + "[" + std::to_string(c) + "]";

    const bool penalized = (t.kind == TermKind::Spline || t.kind == TermKind::BiSpline);
    if (penalized) {
      Eigen::MatrixXd s;
      if (t.kind == TermKind::Spline) {
        s = second_difference_penalty(greville_abscissae(ft.knots1));
      } else {
        const Eigen::Index k1 = ft.knots1.size() - kOrder;
        const Eigen::Index k2 = ft.knots2.size() - kOrder;
        const Eigen::MatrixXd s1 = second_difference_penalty(greville_abscissae(ft.knots1));
        const Eigen::MatrixXd s2 = second_difference_penalty(greville_abscissae(ft.knots2));
        s = Eigen::MatrixXd::Zero(k1 * k2, k1 * k2);
        // S1 (x) I + I (x) S2
        for (Eigen::Index a = 0; a < k1; ++a)
          for (Eigen::Index b = 0; b < k1; ++b)
            for (Eigen::Index j = 0; j < k2; ++j) s(a * k2 + j, b * k2 + j) += s1(a, b);
        for (Eigen::Index a = 0; a < k2; ++a)
          for (Eigen::Index b = 0; b < k2; ++b)
            for (Eigen::Index i = 0; i < k1; ++i) s(i * k2 + a, i * k2 + b) += s2(a, b);
      }
      for (Eigen::Index copy = 0; copy < n_copies; ++copy) {
        out.penalties.push_back({ft.offset + copy * base_width, s});
      }
    } else {
      for (Eigen::Index c = 0; c < ft.width; ++c) out.unpenalized.push_back(ft.offset + c);
    }

    for (Eigen::Index i = 0; i < n; ++i) {
      const bool miss = TimeTable::is_missing(x[i]) || (x2.size() > 0 && TimeTable::is_missing(x2[i])) ||
                        (by.size() > 0 && TimeTable::is_missing(by[i]));
      if (miss) {
        out.row_valid[i] = false;
        continue;
      }
      // copy selector for `by` interactions; -1 suppresses the block
      Eigen::Index copy = 0;
      if (!t.by.empty()) {
        const int li = level_index(ft.by_levels, by[i]);
        if (li < 0) {
          ++out.n_unseen_levels;
          continue;
        }
        copy = by_ref ? li - 1 : li;
        if (copy < 0) continue;  // reference level of a reference-coded interaction
      }
      const Eigen::Index col0 = ft.offset + copy * base_width;
      switch (t.kind) {
        case TermKind::Linear:
          out.X(i, col0) = x[i];
          break;
        case TermKind::Polynomial: {
          double v = 1.0;
          for (int d = 0; d < t.order; ++d) {
            v *= x[i];
            out.X(i, col0 + d) = v;
          }
          break;
        }
        case TermKind::Dummy: {
          const int li = level_index(ft.levels, x[i]);
          if (li < 0) {
            ++out.n_unseen_levels;
          } else if (li > 0) {
            out.X(i, col0 + li - 1) = 1.0;
          }
          break;
        }
        case TermKind::Spline: {
          if (x[i] < ft.knots1[0] || x[i] > ft.knots1[ft.knots1.size() - 1]) ++out.n_clamped;
          out.X.row(i).segment(col0, ft.knots1.size() - kOrder) = bspline_basis_row(x[i], ft.knots1);
          break;
        }
        case TermKind::BiSpline: {
          if (x[i] < ft.knots1[0] || x[i] > ft.knots1[ft.knots1.size() - 1]) ++out.n_clamped;
          if (x2[i] < ft.knots2[0] || x2[i] > ft.knots2[ft.knots2.size() - 1]) ++out.n_clamped;
          const Eigen::VectorXd r1 = bspline_basis_row(x[i], ft.knots1);
          const Eigen::VectorXd r2 = bspline_basis_row(x2[i], ft.knots2);
          for (Eigen::Index a = 0; a < r1.size(); ++a)
            for (Eigen::Index b = 0; b < r2.size(); ++b) out.X(i, col0 + a * r2.size() + b) = r1[a] * r2[b];
          break;
        }
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!out.row_valid[i]) out.X.row(i).setConstant(std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

DesignMatrix build_design(const TimeTable& table, const BasisSpec& spec, FittedBasis* fitted_out) {
  FittedBasis fb = fit_basis(table, spec);
  DesignMatrix dm = build_design(table, fb);
  if (fitted_out) *fitted_out = std::move(fb);
  return dm;
}

QuantileFeatures quantile_features(const TimeTable& table, const FittedBasis& basis) {
  const Eigen::Index n = table.rows();
  QuantileFeatures out;
  out.row_valid = Eigen::ArrayX<bool>::Constant(n, true);
  std::vector<Eigen::VectorXd> cols;
  for (const auto& ft : basis.terms) {
    if (!ft.term.quantile_feature) continue;
    const Eigen::VectorXd x = table.column(ft.term.feature);
    if (ft.term.kind == TermKind::Dummy) {
      const Eigen::Index l = static_cast<Eigen::Index>(ft.levels.size());
      std::vector<Eigen::VectorXd> dummies(l - 1, Eigen::VectorXd::Zero(n));
      for (Eigen::Index i = 0; i < n; ++i) {
        if (TimeTable::is_missing(x[i])) {
          out.row_valid[i] = false;
          continue;
        }
        const int li = level_index(ft.levels, x[i]);
        if (li > 0) dummies[li - 1][i] = 1.0;
      }
      for (Eigen::Index c = 0; c < l - 1; ++c) {
        cols.push_back(dummies[c]);
        out.names.push_back(ft.term.feature + ".d[" + std::to_string(c) + "]");
      }
    } else {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (TimeTable::is_missing(x[i])) out.row_valid[i] = false;
      }
      cols.push_back(x);
      out.names.push_back(ft.term.feature);
    }
  }
  out.B = Eigen::MatrixXd(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) out.B.col(static_cast<Eigen::Index>(c)) = cols[c];
  return out;
}

}  // namespace netload
