#pragma once

// Generalised Pareto distribution primitives. The CDF is
//
//   F(y) = 1 - (1 + xi*y/sigma)^(-1/xi)     xi != 0
//        = 1 - exp(-y/sigma)                xi  = 0
//
// with support y >= 0 for xi >= 0 and 0 <= y <= -sigma/xi for xi < 0.
// Everything is a pure free function on value types; safe for unrestricted
// parallel use.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace netload {

// |shape| below this switches to the exponential branch; avoids catastrophic
// cancellation in (1+xi*y/sigma)^(-1/xi) as xi -> 0.
inline constexpr double kGpdShapeEps = 1e-7;

template <typename Scalar = double>
struct GpdParams {
  Scalar scale;  // sigma > 0
  Scalar shape;  // xi, finite

  GpdParams(Scalar scale_, Scalar shape_) : scale(scale_), shape(shape_) {
    if (!(scale > Scalar(0))) throw std::domain_error("GpdParams: scale must be positive");
    if (!std::isfinite(static_cast<double>(shape))) throw std::domain_error("GpdParams: shape must be finite");
  }

  // Upper end of the support; +inf when shape >= 0.
  Scalar support_upper() const {
    if (shape < Scalar(0)) return -scale / shape;
    return std::numeric_limits<Scalar>::infinity();
  }
};

template <typename Scalar>
Scalar gpd_cdf(Scalar y, const GpdParams<Scalar>& p) {
  if (!(y >= Scalar(0))) throw std::domain_error("gpd_cdf: y must be >= 0");
  if (p.shape < Scalar(0) && y > p.support_upper() * (Scalar(1) + Scalar(1e-12)))
    throw std::domain_error("gpd_cdf: y beyond finite support -scale/shape");
  using std::exp;
  using std::expm1;
  using std::log1p;
  if (std::fabs(static_cast<double>(p.shape)) < kGpdShapeEps) {
    return -expm1(-y / p.scale);
  }
  const Scalar z = p.shape * y / p.scale;
  if (z <= Scalar(-1)) return Scalar(1);  // numerically at the support end
  return -expm1(-log1p(z) / p.shape);
}

// Inverse of gpd_cdf. prob in [0,1); prob = 1 is only admissible for
// shape < 0, where the support is finite.
template <typename Scalar>
Scalar gpd_quantile(Scalar prob, const GpdParams<Scalar>& p) {
  if (!(prob >= Scalar(0) && prob <= Scalar(1)))
    throw std::domain_error("gpd_quantile: prob must be in [0,1]");
  if (prob == Scalar(1)) {
    if (p.shape >= Scalar(0)) throw std::domain_error("gpd_quantile: prob=1 has infinite quantile for shape >= 0");
    return p.support_upper();
  }
  using std::expm1;
  using std::log1p;
  if (std::fabs(static_cast<double>(p.shape)) < kGpdShapeEps) {
    return -p.scale * log1p(-prob);
  }
  return p.scale / p.shape * expm1(-p.shape * log1p(-prob));
}

// log f(y | sigma, xi); -inf outside the support. Used by tail fitting.
template <typename Scalar>
Scalar gpd_logpdf(Scalar y, const GpdParams<Scalar>& p) {
  using std::log;
  using std::log1p;
  if (y < Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
  if (std::fabs(static_cast<double>(p.shape)) < kGpdShapeEps) {
    return -log(p.scale) - y / p.scale;
  }
  const Scalar z = p.shape * y / p.scale;
  if (z <= Scalar(-1)) return -std::numeric_limits<Scalar>::infinity();
  return -log(p.scale) - (Scalar(1) / p.shape + Scalar(1)) * log1p(z);
}

}  // namespace netload
