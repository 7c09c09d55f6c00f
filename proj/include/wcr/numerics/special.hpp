#pragma once

#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "wcr/numerics/error.hpp"

namespace wcr {

inline double gaussian_pdf(double x) noexcept {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

/// Standard normal cdf. Uses erfc on both sides so the lower tail keeps full
/// relative precision.
inline double gaussian_cdf(double x) noexcept {
  if (std::isnan(x)) return x;
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

/// Standard normal quantile on (0, 1).
inline double gaussian_quantile(double u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("gaussian_quantile: u must lie in (0, 1)");
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

}  // namespace wcr
