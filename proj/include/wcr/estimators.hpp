#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wcr/numerics/error.hpp"

namespace wcr {

/// Map from an n-sample to R^l with its exact gradient on R^n.
class Statistic {
 public:
  using ValueFn = std::function<std::vector<double>(std::span<const double>)>;
  using GradientFn = std::function<Eigen::MatrixXd(std::span<const double>)>;

  Statistic(std::string name, std::size_t dim, ValueFn value, GradientFn gradient)
      : name_(std::move(name)), dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)) {}

  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }

  std::vector<double> value(std::span<const double> sample) const { return value_(sample); }

  /// l x n matrix of partials. Throws RegularityError where the statistic is
  /// not differentiable.
  Eigen::MatrixXd gradient(std::span<const double> sample) const { return gradient_(sample); }

 private:
  std::string name_;
  std::size_t dim_;
  ValueFn value_;
  GradientFn gradient_;
};

/// Single-observation scalar statistic a(x) with derivative a'(x).
struct PointStatistic {
  std::string name;
  std::function<double(double)> value;
  std::function<double(double)> derivative;
};

inline PointStatistic power_statistic(int k) {
  return PointStatistic{"x^" + std::to_string(k), [k](double x) { return std::pow(x, k); },
                        [k](double x) { return k == 0 ? 0.0 : k * std::pow(x, k - 1); }};
}

struct WassersteinEstimate {
  double mu = 0.0;
  double sigma = 0.0;       // divisor n
  bool degenerate = false;  // sigma == 0: the sigma-score root sits on the boundary
};

namespace detail {

inline void require_size(std::span<const double> s, std::size_t min_n, const char* who) {
  if (s.size() < min_n) {
    throw DomainError(std::string(who) + ": sample needs at least " + std::to_string(min_n) + " observations");
  }
}

inline double mean(std::span<const double> s) {
  return std::accumulate(s.begin(), s.end(), 0.0) / static_cast<double>(s.size());
}

}  // namespace detail

/// Zero of the summed location-scale scores: sample mean and sample standard
/// deviation with divisor n.
inline WassersteinEstimate wasserstein_estimator(std::span<const double> sample) {
  detail::require_size(sample, 2, "wasserstein_estimator");
  if (std::all_of(sample.begin(), sample.end(), [&](double x) { return x == sample.front(); })) {
    return {sample.front(), 0.0, true};
  }
  const double m = detail::mean(sample);
  double ss = 0.0;
  for (double x : sample) ss += (x - m) * (x - m);
  const double s = std::sqrt(ss / static_cast<double>(sample.size()));
  return {m, s, s == 0.0};
}

/// Rows: grad mu_hat = (1/n)(1..1), grad sigma_hat = (x_t - xbar) / (n sigma_hat).
inline Eigen::MatrixXd grad_wasserstein_estimator(std::span<const double> sample) {
  const WassersteinEstimate est = wasserstein_estimator(sample);
  if (est.degenerate) throw RegularityError("grad_wasserstein_estimator: sigma_hat = 0, gradient undefined");
  const auto n = static_cast<Eigen::Index>(sample.size());
  const double dn = static_cast<double>(sample.size());
  Eigen::MatrixXd g(2, n);
  for (Eigen::Index t = 0; t < n; ++t) {
    g(0, t) = 1.0 / dn;
    g(1, t) = (sample[static_cast<std::size_t>(t)] - est.mu) / (dn * est.sigma);
  }
  return g;
}

struct MedianResult {
  double value = 0.0;
  std::vector<double> gradient;
  bool tie = false;  // the selected order statistic has duplicates
};

/// Sample median with its a.e. gradient: one-hot for odd n, 1/2 on the two
/// middle order statistics for even n. Ties pick the lowest original index.
inline MedianResult sample_median(std::span<const double> sample) {
  detail::require_size(sample, 1, "sample_median");
  const std::size_t n = sample.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sample[a] < sample[b]; });

  // First sorted position holding the same value as position k; stable sort
  // makes that the lowest original index among equal values.
  auto first_equal = [&](std::size_t k) {
    while (k > 0 && sample[order[k - 1]] == sample[order[k]]) --k;
    return k;
  };
  auto duplicated = [&](std::size_t k) {
    const double v = sample[order[k]];
    return (k > 0 && sample[order[k - 1]] == v) || (k + 1 < n && sample[order[k + 1]] == v);
  };

  MedianResult r;
  r.gradient.assign(n, 0.0);
  if (n % 2 == 1) {
    const std::size_t k = (n - 1) / 2;
    r.value = sample[order[k]];
    r.gradient[order[first_equal(k)]] = 1.0;
    r.tie = duplicated(k);
    return r;
  }
  const std::size_t k1 = n / 2 - 1;
  const std::size_t k2 = n / 2;
  r.value = 0.5 * (sample[order[k1]] + sample[order[k2]]);
  const std::size_t p1 = first_equal(k1);
  std::size_t p2 = first_equal(k2);
  if (p2 == p1) p2 = p1 + 1;
  r.gradient[order[p1]] += 0.5;
  r.gradient[order[p2]] += 0.5;
  r.tie = duplicated(k1) || duplicated(k2);
  return r;
}

struct ValueGradient {
  double value = 0.0;
  std::vector<double> gradient;
};

/// (1/n) sum x_t^2 with gradient 2 x_t / n.
inline ValueGradient mean_of_squares(std::span<const double> sample) {
  detail::require_size(sample, 1, "mean_of_squares");
  const double dn = static_cast<double>(sample.size());
  ValueGradient r;
  r.gradient.reserve(sample.size());
  for (double x : sample) {
    r.value += x * x;
    r.gradient.push_back(2.0 * x / dn);
  }
  r.value /= dn;
  return r;
}

enum class MleKind { GaussianLocationScale, LaplaceLocationScale };

inline MleKind parse_mle_kind(std::string_view s) {
  if (s == "gaussian-ls" || s == "gaussian") return MleKind::GaussianLocationScale;
  if (s == "laplace-ls" || s == "laplace") return MleKind::LaplaceLocationScale;
  throw DomainError("mle: unsupported family kind '" + std::string(s) + "'");
}

struct MleEstimate {
  double mu = 0.0;
  std::optional<double> sigma;  // not provided for the Laplace family
};

/// Gaussian: (xbar, sigma_hat with divisor n). Laplace: location only, the
/// sample median.
inline MleEstimate mle(MleKind kind, std::span<const double> sample) {
  detail::require_size(sample, 2, "mle");
  switch (kind) {
    case MleKind::GaussianLocationScale: {
      const auto e = wasserstein_estimator(sample);
      return {e.mu, e.sigma};
    }
    case MleKind::LaplaceLocationScale:
      return {sample_median(sample).value, std::nullopt};
  }
  throw DomainError("mle: unsupported family kind");
}

namespace detail {

inline Eigen::MatrixXd row_matrix(const std::vector<double>& g) {
  Eigen::MatrixXd m(1, static_cast<Eigen::Index>(g.size()));
  for (std::size_t t = 0; t < g.size(); ++t) m(0, static_cast<Eigen::Index>(t)) = g[t];
  return m;
}

}  // namespace detail

inline Statistic sample_mean_statistic() {
  return Statistic(
      "mean", 1,
      [](std::span<const double> s) {
        detail::require_size(s, 1, "mean");
        return std::vector<double>{detail::mean(s)};
      },
      [](std::span<const double> s) {
        detail::require_size(s, 1, "mean");
        return Eigen::MatrixXd::Constant(1, static_cast<Eigen::Index>(s.size()), 1.0 / static_cast<double>(s.size()))
            .eval();
      });
}

inline Statistic sample_std_statistic() {
  return Statistic(
      "std", 1, [](std::span<const double> s) { return std::vector<double>{wasserstein_estimator(s).sigma}; },
      [](std::span<const double> s) { return grad_wasserstein_estimator(s).row(1).eval(); });
}

inline Statistic wasserstein_statistic() {
  return Statistic(
      "wasserstein", 2,
      [](std::span<const double> s) {
        const auto e = wasserstein_estimator(s);
        return std::vector<double>{e.mu, e.sigma};
      },
      [](std::span<const double> s) { return grad_wasserstein_estimator(s); });
}

inline Statistic median_statistic() {
  return Statistic(
      "median", 1, [](std::span<const double> s) { return std::vector<double>{sample_median(s).value}; },
      [](std::span<const double> s) { return detail::row_matrix(sample_median(s).gradient); });
}

inline Statistic mean_of_squares_statistic() {
  return Statistic(
      "mean-sq", 1, [](std::span<const double> s) { return std::vector<double>{mean_of_squares(s).value}; },
      [](std::span<const double> s) { return detail::row_matrix(mean_of_squares(s).gradient); });
}

inline Statistic constant_statistic(double c) {
  return Statistic(
      "constant", 1, [c](std::span<const double>) { return std::vector<double>{c}; },
      [](std::span<const double> s) { return Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(s.size())).eval(); });
}

/// Names accepted on the command line.
inline Statistic statistic_by_name(std::string_view name) {
  if (name == "wasserstein" || name == "mle-gaussian") return wasserstein_statistic();
  if (name == "mean") return sample_mean_statistic();
  if (name == "std") return sample_std_statistic();
  if (name == "median" || name == "mle-laplace") return median_statistic();
  if (name == "mean-sq") return mean_of_squares_statistic();
  if (name == "constant") return constant_statistic(0.0);
  throw DomainError("unknown estimator '" + std::string(name) + "'");
}

}  // namespace wcr
