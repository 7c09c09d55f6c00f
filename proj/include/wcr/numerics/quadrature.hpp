#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <queue>
#include <span>
#include <sstream>
#include <vector>

#include "wcr/numerics/error.hpp"

namespace wcr {

/// Closed interval [lo, hi]; either end may be infinite.
struct Interval {
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double x) const noexcept { return x >= lo && x <= hi; }
  bool finite() const noexcept { return std::isfinite(lo) && std::isfinite(hi); }
};

enum class QuadratureRule { AdaptiveSimpson, GaussLegendrePanels };

struct Quadrature {
  QuadratureRule rule = QuadratureRule::GaussLegendrePanels;
  double abs_tol = 1e-13;
  double rel_tol = 1e-11;
  int max_depth = 48;
};

namespace detail {

struct GaussLegendreTable {
  static constexpr int kOrder = 10;
  std::array<double, kOrder> nodes{};
  std::array<double, kOrder> weights{};

  GaussLegendreTable() {
    // Newton iteration on P_n starting from the Chebyshev-like guess.
    constexpr double pi = 3.14159265358979323846;
    for (int i = 0; i < kOrder; ++i) {
      double x = std::cos(pi * (i + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= kOrder; ++k) {
          const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = pk;
        }
        dp = kOrder * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }
};

inline const GaussLegendreTable& gauss_legendre() {
  static const GaussLegendreTable table;
  return table;
}

struct PanelSum {
  double value;
  double magnitude;  // integral of |f|, sets the roundoff floor
};

template <class F>
PanelSum gl_panel_sum(F& f, double a, double b) {
  const auto& t = gauss_legendre();
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double sum = 0.0;
  double mag = 0.0;
  for (int i = 0; i < GaussLegendreTable::kOrder; ++i) {
    const double v = t.weights[i] * f(mid + half * t.nodes[i]);
    sum += v;
    mag += std::abs(v);
  }
  return {sum * half, mag * std::abs(half)};
}

template <class F>
double gl_panel(F& f, double a, double b) {
  return gl_panel_sum(f, a, b).value;
}

inline void check_finite(double v, double x) {
  if (!std::isfinite(v)) {
    std::ostringstream os;
    os << "integrand is not finite at x=" << x;
    throw DomainError(os.str());
  }
}

template <class F>
double integrate_gauss_legendre(F& f, double a, double b, const Quadrature& q) {
  struct Panel {
    double a, b, coarse, fine, err;
    int depth;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  auto checked = [&f](double x) {
    const double v = f(x);
    check_finite(v, x);
    return v;
  };
  auto make = [&](double lo, double hi, double coarse, int depth) {
    const double m = 0.5 * (lo + hi);
    const PanelSum l = gl_panel_sum(checked, lo, m);
    const PanelSum r = gl_panel_sum(checked, m, hi);
    const double fine = l.value + r.value;
    double err = std::abs(fine - coarse);
    // Differences at the roundoff level of the panel cannot be refined away.
    if (err <= 64.0 * 2.220446049250313e-16 * (l.magnitude + r.magnitude)) err = 0.0;
    return Panel{lo, hi, coarse, fine, err, depth};
  };

  std::priority_queue<Panel> heap;
  Panel root = make(a, b, gl_panel(checked, a, b), 0);
  double total = root.fine;
  double total_err = root.err;
  heap.push(root);

  constexpr std::size_t kMaxPanels = 1u << 18;
  while (total_err > std::max(q.abs_tol, q.rel_tol * std::abs(total))) {
    Panel worst = heap.top();
    if (worst.depth >= q.max_depth || heap.size() >= kMaxPanels) {
      std::ostringstream os;
      os << "quadrature on [" << a << ", " << b << "] stopped at depth " << worst.depth
         << " with error estimate " << total_err;
      throw QuadratureError(os.str(), total, total_err);
    }
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    // The parent's fine estimate is the sum of the two children's coarse ones.
    const double left_coarse = gl_panel(checked, worst.a, m);
    const double right_coarse = worst.fine - left_coarse;
    Panel left = make(worst.a, m, left_coarse, worst.depth + 1);
    Panel right = make(m, worst.b, right_coarse, worst.depth + 1);
    total += left.fine + right.fine - worst.fine;
    total_err += left.err + right.err - worst.err;
    heap.push(left);
    heap.push(right);
    // Re-sum occasionally so the running totals do not drift.
    if ((heap.size() & 255u) == 0) {
      std::vector<Panel> all;
      all.reserve(heap.size());
      total = 0.0;
      total_err = 0.0;
      while (!heap.empty()) {
        all.push_back(heap.top());
        heap.pop();
      }
      for (const auto& p : all) {
        total += p.fine;
        total_err += p.err;
        heap.push(p);
      }
    }
  }
  return total;
}

template <class F>
double simpson_recurse(F& f, double a, double b, double fa, double fm, double fb, double whole,
                       double tol, int depth, const Quadrature& q, double& err_acc) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  check_finite(flm, lm);
  check_finite(frm, rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (std::abs(delta) <= 15.0 * tol) {
    err_acc += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  if (depth >= q.max_depth) {
    std::ostringstream os;
    os << "adaptive Simpson exceeded depth " << q.max_depth << " near x=" << m
       << " (local error " << std::abs(delta) / 15.0 << ")";
    throw QuadratureError(os.str(), left + right, err_acc + std::abs(delta) / 15.0);
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, q, err_acc) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, q, err_acc);
}

template <class F>
double integrate_simpson(F& f, double a, double b, const Quadrature& q) {
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  check_finite(fa, a);
  check_finite(fb, b);
  check_finite(fm, m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // A rough magnitude lets rel_tol participate in the split tolerance.
  const double scale = std::abs(detail::gl_panel(f, a, b));
  const double tol = std::max(q.abs_tol, q.rel_tol * scale);
  double err = 0.0;
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 0, q, err);
}

}  // namespace detail

/// Integrates f over a finite interval. Throws QuadratureError when the
/// requested tolerance cannot be met within max_depth bisections.
template <class F>
double integrate(F&& f, Interval iv, const Quadrature& q = {}) {
  if (!iv.finite()) throw DomainError("integrate: interval must be finite");
  if (iv.lo == iv.hi) return 0.0;
  if (iv.lo > iv.hi) return -integrate(f, Interval{iv.hi, iv.lo}, q);
  switch (q.rule) {
    case QuadratureRule::AdaptiveSimpson:
      return detail::integrate_simpson(f, iv.lo, iv.hi, q);
    case QuadratureRule::GaussLegendrePanels:
      break;
  }
  return detail::integrate_gauss_legendre(f, iv.lo, iv.hi, q);
}

/// Integrates piecewise across interior breakpoints (kinks, cusps). Breakpoints
/// outside the interval are ignored.
template <class F>
double integrate(F&& f, Interval iv, std::span<const double> breakpoints, const Quadrature& q = {}) {
  std::vector<double> cuts{iv.lo};
  for (double b : breakpoints) {
    if (b > iv.lo && b < iv.hi) cuts.push_back(b);
  }
  std::sort(cuts.begin() + 1, cuts.end());
  cuts.push_back(iv.hi);
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    sum += integrate(f, Interval{cuts[k], cuts[k + 1]}, q);
  }
  return sum;
}

template <class F>
double integrate(F&& f, Interval iv, std::initializer_list<double> breakpoints,
                 const Quadrature& q = {}) {
  return integrate(f, iv, std::span<const double>(breakpoints.begin(), breakpoints.size()), q);
}

}  // namespace wcr
