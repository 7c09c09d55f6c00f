#pragma once

// Reference computations for the tests. Nothing here calls into the library;
// each value is produced by a different route (series, fixed-grid Simpson,
// direct closed forms, plain std:: random engines).

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSqrt2 = std::numbers::sqrt2;

// Maclaurin series of erf, fine for |x| <= 4 in double precision.
inline double erf_series(double x) {
  double term = x;
  double sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= -x * x / k;
    const double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-18 * std::abs(sum)) break;
  }
  return 2.0 / std::sqrt(kPi) * sum;
}

// Continued fraction for erfc, x > 0; used where the series cancels.
inline double erfc_cf(double x) {
  double f = 0.0;
  for (int k = 300; k >= 1; --k) f = (k / 2.0) / (x + f);
  return std::exp(-x * x) / std::sqrt(kPi) / (x + f);
}

inline double normal_cdf(double x) {
  const double t = x / kSqrt2;
  if (t > 2.0) return 1.0 - 0.5 * erfc_cf(t);
  if (t < -2.0) return 0.5 * erfc_cf(-t);
  return 0.5 * (1.0 + erf_series(t));
}
inline double normal_pdf(double x, double s = 1.0) {
  return std::exp(-0.5 * x * x / (s * s)) / (s * std::sqrt(2.0 * kPi));
}

// Composite Simpson with m (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int m = 4000) {
  if (m % 2) ++m;
  const double h = (b - a) / m;
  double s = f(a) + f(b);
  for (int k = 1; k < m; ++k) s += (k % 2 ? 4.0 : 2.0) * f(a + k * h);
  return s * h / 3.0;
}

// Simpson on [a, b] with extra split points.
inline double simpson_split(const std::function<double(double)>& f, std::vector<double> cuts, int m = 4000) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) s += simpson(f, cuts[k], cuts[k + 1], m);
  return s;
}

// Unit-variance bases written from scratch.
struct Base {
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  double half_width;  // integration range used by the oracles
};

inline Base gaussian() {
  return {[](double z) { return normal_pdf(z); }, [](double z) { return normal_cdf(z); },
          [](double u) {
            // Bisection on the series cdf.
            double lo = -9.0, hi = 9.0;
            for (int i = 0; i < 200; ++i) {
              const double mid = 0.5 * (lo + hi);
              (normal_cdf(mid) < u ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
          },
          9.0};
}

inline Base laplace() {
  const double b = 1.0 / kSqrt2;
  return {[b](double z) { return std::exp(-std::abs(z) / b) / (2.0 * b); },
          [b](double z) { return z < 0 ? 0.5 * std::exp(z / b) : 1.0 - 0.5 * std::exp(-z / b); },
          [b](double u) { return u < 0.5 ? b * std::log(2.0 * u) : -b * std::log(2.0 * (1.0 - u)); }, 28.0};
}

inline Base logistic() {
  const double s = std::sqrt(3.0) / kPi;
  return {[s](double z) {
            const double e = std::exp(-std::abs(z) / s);
            return e / (s * (1.0 + e) * (1.0 + e));
          },
          [s](double z) { return 1.0 / (1.0 + std::exp(-z / s)); },
          [s](double u) { return s * std::log(u / (1.0 - u)); }, 40.0};
}

// Wasserstein score gradients of a location-scale family, by the transport
// map x -> mu + sigma z differentiated in each coordinate.
inline double dphi_mu(double, double, double) { return 1.0; }
inline double dphi_sigma(double x, double mu, double sigma) { return (x - mu) / sigma; }

// E_{mu,sigma}[g(X)] for a location-scale family over `base`.
inline double expect_ls(const Base& base, double mu, double sigma, const std::function<double(double)>& g,
                        int m = 8000) {
  const double L = base.half_width;
  return simpson_split([&](double z) { return g(mu + sigma * z) * base.pdf(z); }, {-L, 0.0, L}, m);
}

// Laplace(0, sigma) + N(0, eps^2) density at 0 by direct convolution.
inline double convolved_laplace_at_zero(double sigma, double eps) {
  const double b = sigma / kSqrt2;
  auto f = [&](double x) { return std::exp(-std::abs(x) / b) / (2.0 * b) * normal_pdf(-x, eps); };
  const double L = 12.0 * eps;
  return simpson_split(f, {-L, -0.5 * eps, 0.0, 0.5 * eps, L}, 20000);
}

// cdf of Laplace(0, sigma) + N(0, eps^2) by convolution over the noise.
inline double noisy_laplace_cdf(double x, double sigma, double eps) {
  const double b = sigma / kSqrt2;
  auto F = [&](double y) { return y < 0 ? 0.5 * std::exp(y / b) : 1.0 - 0.5 * std::exp(-y / b); };
  return simpson_split([&](double z) { return F(x - z) * normal_pdf(z, eps); },
                       {-10.0 * eps, x, 10.0 * eps}, 20000);
}

// E of the divisor-n sample standard deviation of n standard normals, via
// tgamma directly.
inline double chi_cn(std::size_t n) {
  const double dn = static_cast<double>(n);
  if (n < 150) return std::sqrt(2.0 / dn) * std::tgamma(dn / 2.0) / std::tgamma((dn - 1.0) / 2.0);
  // Asymptotic series sqrt((n-1)/n) (1 - 1/(4(n-1)) + 1/(32(n-1)^2)).
  const double m = dn - 1.0;
  return std::sqrt(m / dn) * (1.0 - 1.0 / (4.0 * m) + 1.0 / (32.0 * m * m));
}

// Midpoint rule over quantile levels.
inline double w2_squared_halved(const std::function<double(double)>& q1, const std::function<double(double)>& q2,
                                int m = 400000) {
  double s = 0.0;
  for (int k = 0; k < m; ++k) {
    const double u = (k + 0.5) / m;
    const double d = q1(u) - q2(u);
    s += d * d;
  }
  return 0.5 * s / m;
}

// Plain Monte Carlo mean and standard error of f(sample) with a std:: engine.
struct McResult {
  double mean;
  double se;
};

template <class Draw, class F>
McResult monte_carlo(std::size_t trials, std::size_t n, unsigned seed, Draw&& draw, F&& f) {
  std::mt19937_64 eng(seed);
  std::vector<double> x(n);
  double s = 0.0, s2 = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    for (double& v : x) v = draw(eng);
    const double y = f(x);
    s += y;
    s2 += y * y;
  }
  const double m = s / trials;
  const double var = (s2 / trials - m * m) * trials / (trials - 1.0);
  return {m, std::sqrt(var / trials)};
}

}  // namespace oracle
