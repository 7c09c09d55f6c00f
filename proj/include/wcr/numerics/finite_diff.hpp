#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "wcr/numerics/error.hpp"

namespace wcr {

/// Step used by every central difference in the library unless overridden.
inline double default_step(double x) noexcept { return 1e-5 * std::max(1.0, std::abs(x)); }

/// Symmetric difference quotient (f(x+h) - f(x-h)) / 2h; O(h^2) on smooth f.
template <class F>
double central_diff(F&& f, double x, double h) {
  if (!(h > 0.0)) throw DomainError("central_diff: step must be positive");
  const double fp = f(x + h);
  const double fm = f(x - h);
  if (!std::isfinite(fp) || !std::isfinite(fm)) {
    std::ostringstream os;
    os << "central_diff: non-finite function value near x=" << x;
    throw DomainError(os.str());
  }
  return (fp - fm) / (2.0 * h);
}

template <class F>
double central_diff(F&& f, double x) {
  return central_diff(f, x, default_step(x));
}

/// Richardson extrapolation of g(h) -> g(0) for an error expansion
/// c1 h^order + c2 h^(2 order) + ... when order_step == order, or
/// c1 h + c2 h^2 + ... when order_step == 1. The step is halved `levels` times.
template <class G>
double richardson_limit(G&& g, double h0, int levels, int order = 1, int order_step = 1) {
  std::vector<double> row;
  row.reserve(static_cast<std::size_t>(levels) + 1);
  double h = h0;
  for (int k = 0; k <= levels; ++k, h *= 0.5) {
    double cur = g(h);
    std::vector<double> next{cur};
    for (std::size_t j = 0; j < row.size(); ++j) {
      const double factor = std::pow(2.0, order + static_cast<int>(j) * order_step);
      cur = next.back() + (next.back() - row[j]) / (factor - 1.0);
      next.push_back(cur);
    }
    row = std::move(next);
  }
  return row.back();
}

}  // namespace wcr
