#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wcr/families.hpp"
#include "wcr/numerics/finite_diff.hpp"
#include "wcr/numerics/quadrature.hpp"

namespace wcr {

/// Wasserstein score Phi_i(x; theta) of one parameter together with its
/// spatial derivative. phi is centered so that E_theta[phi] = 0; dphi is the
/// canonical object (phi is only defined up to that constant).
class WassersteinScore {
 public:
  WassersteinScore(std::size_t index, ParameterPoint theta, std::function<double(double)> phi,
                   std::function<double(double)> dphi, Interval domain, bool closed_form)
      : index_(index),
        theta_(std::move(theta)),
        phi_(std::move(phi)),
        dphi_(std::move(dphi)),
        domain_(domain),
        closed_form_(closed_form) {}

  double phi(double x) const { return phi_(x); }
  double dphi(double x) const { return dphi_(x); }

  std::size_t param_index() const noexcept { return index_; }
  const ParameterPoint& theta() const noexcept { return theta_; }
  /// Where phi and dphi may be evaluated.
  Interval domain() const noexcept { return domain_; }
  bool closed_form() const noexcept { return closed_form_; }

 private:
  std::size_t index_;
  ParameterPoint theta_;
  std::function<double(double)> phi_;
  std::function<double(double)> dphi_;
  Interval domain_;
  bool closed_form_;
};

enum class LsParam : std::size_t { Mu = 0, Sigma = 1 };

namespace detail {
inline constexpr Interval kRealLine{-std::numeric_limits<double>::infinity(),
                                    std::numeric_limits<double>::infinity()};
}

/// Scores of a location-scale family with a mean-0, variance-1 base:
///   Phi_mu = x - mu,  Phi_sigma = (x - mu)^2 / (2 sigma) - sigma / 2.
inline WassersteinScore closed_form_score_ls(const ParameterPoint& theta, LsParam which) {
  if (theta.size() != 2) throw DomainError("closed_form_score_ls: theta must be (mu, sigma)");
  const double mu = theta[0];
  const double sigma = theta[1];
  detail::require_positive(sigma, "sigma");
  if (which == LsParam::Mu) {
    return WassersteinScore(
        0, theta, [mu](double x) { return x - mu; }, [](double) { return 1.0; }, detail::kRealLine, true);
  }
  return WassersteinScore(
      1, theta, [mu, sigma](double x) { return (x - mu) * (x - mu) / (2.0 * sigma) - 0.5 * sigma; },
      [mu, sigma](double x) { return (x - mu) / sigma; }, detail::kRealLine, true);
}

/// Solves the one-dimensional continuity equation
///   d/dtheta_i p + d/dx (p dphi) = 0
/// with vanishing flux at the support boundary, i.e. p dphi = -dF/dtheta_i.
/// phi integrates dphi from the median and is shifted to mean zero. Both are
/// only available inside the truncated window.
inline WassersteinScore solve_score_1d(const ParametricFamily1D& family, const ParameterPoint& theta,
                                       std::size_t i, const Quadrature& q = {}) {
  family.validate(theta);
  if (i >= family.param_dim()) {
    std::ostringstream os;
    os << "solve_score_1d: parameter index " << i << " out of range (p=" << family.param_dim() << ")";
    throw DomainError(os.str());
  }

  struct State {
    ParametricFamily1D family;
    ParameterPoint theta;
    std::size_t index;
    Quadrature q;
    Interval window{};
    double anchor = 0.0;
    double shift = 0.0;

    double dphi(double x) const {
      if (!window.contains(x)) {
        std::ostringstream os;
        os << "score derivative requested at x=" << x << " outside the window [" << window.lo << ", "
           << window.hi << "]";
        throw DomainError(os.str());
      }
      const double p = family.pdf(x, theta);
      if (!(p >= std::numeric_limits<double>::min())) {
        std::ostringstream os;
        os << "pdf underflow at x=" << x << " (p=" << p << ") inside the integration window";
        throw DomainError(os.str());
      }
      return -family.dtheta_cdf(x, theta, index) / p;
    }

    double uncentered(double x) const {
      return integrate([this](double y) { return dphi(y); }, Interval{anchor, x}, q);
    }
  };

  auto st = std::make_shared<State>(State{family, theta, i, q});
  st->window = family.window(theta);
  st->anchor = family.median(theta);

  // E[int_m^X dphi] by parts: mass above y for y > m, mass below y for y < m.
  const double f_lo = family.cdf(st->window.lo, theta);
  const double f_hi = family.cdf(st->window.hi, theta);
  const double upper = integrate(
      [&](double y) { return st->dphi(y) * (f_hi - family.cdf(y, theta)); }, Interval{st->anchor, st->window.hi}, q);
  const double lower = integrate(
      [&](double y) { return st->dphi(y) * (family.cdf(y, theta) - f_lo); }, Interval{st->window.lo, st->anchor}, q);
  st->shift = -(upper - lower);

  return WassersteinScore(
      i, theta,
      [st](double x) {
        (void)st->dphi(x);  // domain and underflow checks
        return st->uncentered(x) + st->shift;
      },
      [st](double x) { return st->dphi(x); }, st->window, false);
}

/// Score of parameter i, closed form where the family kind admits one,
/// otherwise the numerical solver.
inline WassersteinScore score(const ParametricFamily1D& family, const ParameterPoint& theta, std::size_t i,
                              const Quadrature& q = {}) {
  family.validate(theta);
  if (i >= family.param_dim()) throw DomainError("score: parameter index out of range");
  const auto& base = family.base();
  switch (family.kind()) {
    case FamilyKind::LocationScale:
      return closed_form_score_ls(theta, static_cast<LsParam>(i));
    case FamilyKind::Location: {
      const double shift = theta[0] + base->mean;
      return WassersteinScore(
          0, theta, [shift](double x) { return x - shift; }, [](double) { return 1.0; }, detail::kRealLine, true);
    }
    case FamilyKind::Scale: {
      const double t = theta[0];
      const double second_moment = t * t * (base->variance + base->mean * base->mean);
      return WassersteinScore(
          0, theta, [t, second_moment](double x) { return (x * x - second_moment) / (2.0 * t); },
          [t](double x) { return x / t; }, detail::kRealLine, true);
    }
    case FamilyKind::Custom:
      break;
  }
  return solve_score_1d(family, theta, i, q);
}

/// All p scores of the family at theta.
inline std::vector<WassersteinScore> scores(const ParametricFamily1D& family, const ParameterPoint& theta,
                                            const Quadrature& q = {}) {
  std::vector<WassersteinScore> out;
  for (std::size_t i = 0; i < family.param_dim(); ++i) out.push_back(score(family, theta, i, q));
  return out;
}

/// Pointwise residual d/dtheta_i p + d/dx (p dphi) by central differences.
inline double continuity_residual(const ParametricFamily1D& family, const ParameterPoint& theta,
                                  const WassersteinScore& s, double x) {
  const std::size_t i = s.param_index();
  const double dp = central_diff([&](double t) { return family.pdf(x, theta.with(i, t)); }, theta[i]);
  const double dflux = central_diff([&](double y) { return family.pdf(y, theta) * s.dphi(y); }, x);
  return dp + dflux;
}

/// Evenly spaced points between the 1e-6 and 1 - 1e-6 quantiles.
inline std::vector<double> score_grid(const ParametricFamily1D& family, const ParameterPoint& theta,
                                      std::size_t points) {
  if (points < 2) throw DomainError("score_grid: need at least 2 points");
  const double lo = family.quantile(1e-6, theta);
  const double hi = family.quantile(1.0 - 1e-6, theta);
  std::vector<double> g(points);
  for (std::size_t k = 0; k < points; ++k) {
    g[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
  }
  return g;
}

/// Score of n i.i.d. observations: Phi^(n)(x_1..x_n) = sum_t Phi(x_t), whose
/// R^n gradient has entries dphi(x_t).
class ProductScore {
 public:
  ProductScore(std::vector<WassersteinScore> per_param, std::size_t n)
      : scores_(std::move(per_param)), n_(n) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t param_dim() const noexcept { return scores_.size(); }
  const std::vector<WassersteinScore>& per_observation() const noexcept { return scores_; }

  std::vector<double> value(std::span<const double> sample) const {
    check(sample);
    std::vector<double> v(scores_.size(), 0.0);
    for (std::size_t i = 0; i < scores_.size(); ++i)
      for (double x : sample) v[i] += scores_[i].phi(x);
    return v;
  }

  /// p x n matrix of partial derivatives.
  Eigen::MatrixXd gradient(std::span<const double> sample) const {
    check(sample);
    Eigen::MatrixXd g(static_cast<Eigen::Index>(scores_.size()), static_cast<Eigen::Index>(n_));
    for (std::size_t i = 0; i < scores_.size(); ++i)
      for (std::size_t t = 0; t < n_; ++t)
        g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = scores_[i].dphi(sample[t]);
    return g;
  }

 private:
  void check(std::span<const double> sample) const {
    if (sample.size() != n_) throw DomainError("ProductScore: sample size does not match n");
  }

  std::vector<WassersteinScore> scores_;
  std::size_t n_;
};

inline ProductScore product_score(std::vector<WassersteinScore> per_param, std::size_t n) {
  if (n == 0) throw DomainError("product_score: n must be >= 1");
  if (per_param.empty()) throw DomainError("product_score: need at least one score");
  return ProductScore(std::move(per_param), n);
}

}  // namespace wcr
