#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wcr/efficiency.hpp"
#include "wcr/estimators.hpp"
#include "wcr/families.hpp"
#include "wcr/numerics/monte_carlo.hpp"
#include "wcr/numerics/quadrature.hpp"
#include "wcr/numerics/special.hpp"

namespace wcr {

// ---------------------------------------------------------------------------
// Expected sample standard deviation c_n
// ---------------------------------------------------------------------------

/// E[sigma_hat] for n standard normal draws, divisor n:
/// sqrt(2/n) Gamma(n/2) / Gamma((n-1)/2).
inline double chi_moment_cn(std::size_t n) {
  if (n < 2) throw DomainError("chi_moment_cn: n must be >= 2");
  const double dn = static_cast<double>(n);
  return std::sqrt(2.0 / dn) * std::exp(std::lgamma(0.5 * dn) - std::lgamma(0.5 * (dn - 1.0)));
}

enum class CnMethod { MonteCarlo, GaussianAnalytic };

struct CnEstimate {
  double value = 0.0;
  double std_error = 0.0;  // zero for the analytic path
  std::size_t trials = 0;
};

/// c_n for a unit-variance base, analytically (Gaussian only) or by sampling.
inline CnEstimate expected_sample_std(const BaseDensity& base, std::size_t n, CnMethod method,
                                      const McConfig& cfg = {}) {
  if (n < 2) throw DomainError("expected_sample_std: n must be >= 2");
  if (method == CnMethod::GaussianAnalytic) {
    if (base.name != "gaussian") throw DomainError("expected_sample_std: analytic path needs the gaussian base");
    return {chi_moment_cn(n), 0.0, 0};
  }
  const ParametricFamily1D family = make_location_scale(base);
  const ParameterPoint unit{0.0, 1.0};
  const McSamples s = run_trials(cfg, 1, [&](TrialStream& rng, std::span<double> out) {
    std::vector<double> x(n);
    sample_into(family, unit, rng, x);
    out[0] = wasserstein_estimator(x).sigma;
    return true;
  });
  const McEstimate e = s.estimate(0);
  return {e.mean, e.std_error, e.count};
}

// ---------------------------------------------------------------------------
// Asymptotic efficiency of the Wasserstein estimator
// ---------------------------------------------------------------------------

struct SweepRow {
  std::size_t n = 0;
  SymMatrix var_w;  // MC; equals I/n up to rounding
  SymMatrix g_w;    // n I
  double c_n = 0.0;  // d E[sigma_hat] / d sigma = E[sigma_hat] / sigma
  double c_n_se = 0.0;
  std::optional<double> c_n_oracle;  // Gaussian base only
  SymMatrix scaled_gap;              // n (Var^W - bound)
  double scaled_gap_sigma = 0.0;     // MC error of the (sigma, sigma) entry
};

/// For each n: efficiency_gap of (mu_hat_W, sigma_hat_W) in the location-scale
/// family over `base`, scaled by n.
inline std::vector<SweepRow> asymptotic_efficiency_sweep(const BaseDensity& base, const ParameterPoint& theta,
                                                         const std::vector<std::size_t>& ns, const McConfig& cfg) {
  if (ns.empty()) throw DomainError("asymptotic_efficiency_sweep: empty n list");
  for (std::size_t k = 0; k < ns.size(); ++k) {
    if (ns[k] < 2) throw DomainError("asymptotic_efficiency_sweep: every n must be >= 2");
    if (k > 0 && ns[k] <= ns[k - 1]) throw DomainError("asymptotic_efficiency_sweep: n list must be increasing");
  }
  const ParametricFamily1D family = make_location_scale(base);
  family.validate(theta);
  const Statistic stat = wasserstein_statistic();
  std::vector<SweepRow> rows;
  for (std::size_t n : ns) {
    const EfficiencyReport r = efficiency_gap(family, theta, stat, n, cfg);
    SweepRow row;
    row.n = n;
    row.var_w = r.var_w.var;
    row.g_w = r.info.g;
    row.c_n = r.dexp(1, 1);
    row.c_n_se = r.dexp_se(1, 1);
    if (base.name == "gaussian") row.c_n_oracle = chi_moment_cn(n);
    const double dn = static_cast<double>(n);
    // Equivariance pins E[mu_hat] = mu and E[sigma_hat] = c_n sigma, so only
    // c_n is sampled; the sampled off-diagonal slopes are pure noise.
    SymMatrix bound(2);
    bound.set(0, 0, 1.0 / r.info.g(0, 0));
    bound.set(1, 1, row.c_n * row.c_n / r.info.g(1, 1));
    row.scaled_gap = (r.var_w.var - bound).scaled(dn);
    // n * gap_22 = 1 - c_n^2 up to the Var^W rounding; its error is 2 c_n se(c_n).
    row.scaled_gap_sigma = 2.0 * std::abs(row.c_n) * row.c_n_se;
    rows.push_back(std::move(row));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Median variance formulas for Laplace data with Gaussian noise
// ---------------------------------------------------------------------------

/// Large-n variance of the sample median: 1 / (4 n p(m)^2).
inline double median_asymptotic_variance(double density_at_median, std::size_t n) {
  if (!(density_at_median > 0.0)) throw DomainError("median_asymptotic_variance: density at the median must be > 0");
  if (n == 0) throw DomainError("median_asymptotic_variance: n must be >= 1");
  return 1.0 / (4.0 * static_cast<double>(n) * density_at_median * density_at_median);
}

/// Density at mu of Laplace(mu, sigma) convolved with N(0, eps^2):
/// (sqrt2 / sigma) Phi(-sqrt2 eps / sigma) exp(eps^2 / sigma^2).
inline double convolved_laplace_median_density(double sigma, double eps) {
  detail::require_positive(sigma, "sigma");
  if (eps < 0.0) throw DomainError("convolved_laplace_median_density: eps must be >= 0");
  const double r2 = std::numbers::sqrt2;
  return r2 / sigma * gaussian_cdf(-r2 * eps / sigma) * std::exp(eps * eps / (sigma * sigma));
}

/// Large-n variance of the median of noisy Laplace data.
inline double noisy_median_variance_prediction(double sigma, double eps, std::size_t n) {
  return median_asymptotic_variance(convolved_laplace_median_density(sigma, eps), n);
}

/// First-order expansion (sigma^2 / 2n)(1 + 4 eps / (sqrt(pi) sigma)).
inline double noisy_median_variance_first_order(double sigma, double eps, std::size_t n) {
  detail::require_positive(sigma, "sigma");
  return sigma * sigma / (2.0 * static_cast<double>(n)) *
         (1.0 + 4.0 / (std::sqrt(std::numbers::pi) * sigma) * eps);
}

/// Predicted (Var_noisy - Var_clean) / eps^2 of the Laplace median.
inline double ml_noise_slope_prediction(double sigma, double eps, std::size_t n) {
  detail::require_positive(eps, "eps");
  return 2.0 * sigma / (std::sqrt(std::numbers::pi) * static_cast<double>(n) * eps);
}

/// cdf of Laplace(0, sigma) + N(0, eps^2).
inline double laplace_gaussian_cdf(double x, double sigma, double eps) {
  detail::require_positive(sigma, "sigma");
  const double b = sigma / std::numbers::sqrt2;
  if (eps == 0.0) return x < 0.0 ? 0.5 * std::exp(x / b) : 1.0 - 0.5 * std::exp(-x / b);
  const double a = eps * eps / (2.0 * b * b);
  auto term = [](double log_scale, double arg) {
    const double c = gaussian_cdf(arg);
    return c > 0.0 ? std::exp(log_scale + std::log(c)) : 0.0;
  };
  return gaussian_cdf(x / eps) - 0.5 * term(a - x / b, x / eps - eps / b) +
         0.5 * term(a + x / b, -x / eps - eps / b);
}

/// Exact variance of the median of n (odd) draws from a continuous law given
/// by its cdf: E[(Q(U) - center)^2] with U ~ Beta(k+1, k+1), n = 2k+1.
/// `bracket` must contain the relevant quantiles.
template <class Cdf>
double finite_n_median_variance(Cdf&& cdf, std::size_t n, double center, Interval bracket,
                                const Quadrature& q = {}) {
  if (n % 2 == 0 || n == 0) throw DomainError("finite_n_median_variance: n must be odd");
  const double k = static_cast<double>((n - 1) / 2);
  const double log_norm = std::lgamma(2.0 * k + 2.0) - 2.0 * std::lgamma(k + 1.0);
  const double sd = 0.5 / std::sqrt(2.0 * k + 3.0);
  const Interval u_range{std::max(1e-12, 0.5 - 14.0 * sd), std::min(1.0 - 1e-12, 0.5 + 14.0 * sd)};
  auto quantile = [&](double u) {
    return detail::solve_monotone([&](double x) { return cdf(x) - u; }, bracket.lo, bracket.hi);
  };
  return integrate(
      [&](double u) {
        const double d = quantile(u) - center;
        return d * d * std::exp(log_norm + k * (std::log(u) + std::log1p(-u)));
      },
      u_range, {0.5}, q);
}

// ---------------------------------------------------------------------------
// Laplace robustness experiment
// ---------------------------------------------------------------------------

struct RobustnessCell {
  double eps = 0.0;
  McEstimate var_w_noisy;
  McEstimate var_ml_noisy;
  double slope_w = 0.0;
  double slope_w_se = 0.0;
  double slope_ml = 0.0;
  double slope_ml_se = 0.0;
  double predicted_slope_w = 0.0;   // 1/n
  double predicted_slope_ml = 0.0;  // 2 sigma / (sqrt(pi) n eps)
  double predicted_var_ml_noisy = 0.0;  // 1 / (4 n p_eps(mu)^2)
  double exact_slope_ml = 0.0;          // finite-n order-statistic quadrature
};

struct RobustnessReport {
  double sigma = 1.0;
  std::size_t n = 0;
  std::size_t trials = 0;
  McEstimate var_w_clean;   // per-trial value is the squared deviation
  McEstimate var_ml_clean;
  double exact_var_ml_clean = 0.0;
  std::vector<RobustnessCell> cells;
};

namespace detail {

inline McEstimate variance_estimate(const std::vector<double>& v) {
  const McEstimate m = summarize(v);
  std::vector<double> sq(v.size());
  for (std::size_t t = 0; t < v.size(); ++t) sq[t] = (v[t] - m.mean) * (v[t] - m.mean);
  McEstimate e = summarize(sq);
  // Unbiased sample variance; the standard error stays that of the squares.
  if (v.size() > 1) e.mean *= static_cast<double>(v.size()) / static_cast<double>(v.size() - 1);
  return e;
}

// (Var(b) - Var(a)) / eps^2 with its standard error from the paired squares.
inline std::pair<double, double> variance_slope(const std::vector<double>& clean, const std::vector<double>& noisy,
                                                double eps) {
  const double ma = summarize(clean).mean;
  const double mb = summarize(noisy).mean;
  std::vector<double> d(clean.size());
  for (std::size_t t = 0; t < clean.size(); ++t) {
    d[t] = (noisy[t] - mb) * (noisy[t] - mb) - (clean[t] - ma) * (clean[t] - ma);
  }
  const McEstimate e = summarize(d);
  const double corr = static_cast<double>(d.size()) / static_cast<double>(d.size() - 1);
  return {e.mean * corr / (eps * eps), e.std_error / (eps * eps)};
}

inline double median_in_place(std::vector<double>& v) {
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  return 0.5 * (*mid + *std::max_element(v.begin(), mid));
}

}  // namespace detail

/// Variances of the sample mean (Wasserstein estimator) and sample median
/// (Laplace MLE) for mu on clean Laplace(0, sigma) samples and on the same
/// samples plus N(0, eps^2) noise (common random numbers).
inline RobustnessReport laplace_robustness(double sigma, std::size_t n, const std::vector<double>& eps_list,
                                           const McConfig& cfg, bool exact_finite_n = true) {
  detail::require_positive(sigma, "sigma");
  if (n % 2 == 0) throw DomainError("laplace_robustness: n must be odd");
  if (eps_list.empty()) throw DomainError("laplace_robustness: empty eps list");
  for (double e : eps_list) {
    if (!(e > 0.0 && e < sigma)) throw DomainError("laplace_robustness: eps must lie in (0, sigma)");
  }
  const ParametricFamily1D family = make_location_scale(laplace_base());
  const ParameterPoint theta{0.0, sigma};
  const std::size_t E = eps_list.size();

  const McSamples s = run_trials(cfg, 2 + 2 * E, [&](TrialStream& rng, std::span<double> out) {
    std::vector<double> x(n), z(n), y(n);
    sample_into(family, theta, rng, x);
    for (double& v : z) v = rng.normal();
    double sx = 0.0;
    double sz = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      sx += x[t];
      sz += z[t];
    }
    const double dn = static_cast<double>(n);
    out[0] = sx / dn;
    y = x;
    out[1] = detail::median_in_place(y);
    for (std::size_t e = 0; e < E; ++e) {
      const double eps = eps_list[e];
      for (std::size_t t = 0; t < n; ++t) y[t] = x[t] + eps * z[t];
      out[2 + 2 * e] = (sx + eps * sz) / dn;
      out[3 + 2 * e] = detail::median_in_place(y);
    }
    return true;
  });

  RobustnessReport r;
  r.sigma = sigma;
  r.n = n;
  r.trials = cfg.trials;
  const std::vector<double> w0 = s.column(0);
  const std::vector<double> m0 = s.column(1);
  r.var_w_clean = detail::variance_estimate(w0);
  r.var_ml_clean = detail::variance_estimate(m0);

  const Interval bracket{-30.0 * sigma, 30.0 * sigma};
  if (exact_finite_n) {
    r.exact_var_ml_clean = finite_n_median_variance(
        [&](double x) { return laplace_gaussian_cdf(x, sigma, 0.0); }, n, 0.0, bracket);
  }
  for (std::size_t e = 0; e < E; ++e) {
    const double eps = eps_list[e];
    RobustnessCell c;
    c.eps = eps;
    const std::vector<double> w = s.column(2 + 2 * e);
    const std::vector<double> m = s.column(3 + 2 * e);
    c.var_w_noisy = detail::variance_estimate(w);
    c.var_ml_noisy = detail::variance_estimate(m);
    std::tie(c.slope_w, c.slope_w_se) = detail::variance_slope(w0, w, eps);
    std::tie(c.slope_ml, c.slope_ml_se) = detail::variance_slope(m0, m, eps);
    c.predicted_slope_w = 1.0 / static_cast<double>(n);
    c.predicted_slope_ml = ml_noise_slope_prediction(sigma, eps, n);
    c.predicted_var_ml_noisy = noisy_median_variance_prediction(sigma, eps, n);
    if (exact_finite_n) {
      const double v = finite_n_median_variance(
          [&](double x) { return laplace_gaussian_cdf(x, sigma, eps); }, n, 0.0, bracket);
      c.exact_slope_ml = (v - r.exact_var_ml_clean) / (eps * eps);
    }
    r.cells.push_back(c);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Acceptance bands reported by the experiment commands
// ---------------------------------------------------------------------------

struct Band {
  std::string name;
  bool passed = false;
  std::string detail;
};

inline std::vector<Band> robustness_bands(const RobustnessReport& r) {
  std::vector<Band> bands;
  auto fmt = [](auto&&... parts) {
    std::ostringstream os;
    os.precision(6);
    (os << ... << parts);
    return os.str();
  };
  const double dn = static_cast<double>(r.n);
  const double s2 = r.sigma * r.sigma;
  const double w_target = s2 / dn;
  bands.push_back({"clean Var(mu_W) within 2% of sigma^2/n",
                   std::abs(r.var_w_clean.mean - w_target) <= 0.02 * w_target,
                   fmt(r.var_w_clean.mean, " vs ", w_target)});
  const double ml_target = s2 / (2.0 * dn);
  bands.push_back({"clean Var(mu_ML) within 10% of sigma^2/(2n)",
                   std::abs(r.var_ml_clean.mean - ml_target) <= 0.10 * ml_target,
                   fmt(r.var_ml_clean.mean, " vs ", ml_target)});
  for (const auto& c : r.cells) {
    bands.push_back({fmt("W slope within 3 sigma of 1/n at eps=", c.eps),
                     std::abs(c.slope_w - c.predicted_slope_w) <= 3.0 * c.slope_w_se,
                     fmt(c.slope_w, " +- ", c.slope_w_se, " vs ", c.predicted_slope_w)});
    bands.push_back({fmt("ML slope within 15% of 2 sigma/(sqrt(pi) n eps) at eps=", c.eps),
                     std::abs(c.slope_ml - c.predicted_slope_ml) <= 0.15 * c.predicted_slope_ml,
                     fmt(c.slope_ml, " +- ", c.slope_ml_se, " vs ", c.predicted_slope_ml, " (ratio ",
                         c.slope_ml / c.predicted_slope_ml, ")")});
  }
  // Monotone: slope grows as eps shrinks.
  std::vector<RobustnessCell> by_eps = r.cells;
  std::sort(by_eps.begin(), by_eps.end(), [](const auto& a, const auto& b) { return a.eps < b.eps; });
  bool mono = true;
  for (std::size_t k = 1; k < by_eps.size(); ++k) mono = mono && by_eps[k - 1].slope_ml > by_eps[k].slope_ml;
  bands.push_back({"ML slope increases as eps decreases", mono, ""});
  return bands;
}

inline std::vector<Band> sweep_bands(const std::vector<SweepRow>& rows) {
  std::vector<Band> bands;
  auto fmt = [](auto&&... parts) {
    std::ostringstream os;
    os.precision(6);
    (os << ... << parts);
    return os.str();
  };
  for (const auto& r : rows) {
    if (r.c_n_oracle) {
      bands.push_back({fmt("c_n within 3 sigma of chi moment at n=", r.n),
                       std::abs(r.c_n - *r.c_n_oracle) <= 3.0 * r.c_n_se,
                       fmt(r.c_n, " +- ", r.c_n_se, " vs ", *r.c_n_oracle)});
    }
    bands.push_back({fmt("scaled gap (mu, mu) entry is zero at n=", r.n),
                     std::abs(r.scaled_gap(0, 0)) <= 1e-9, fmt(r.scaled_gap(0, 0))});
  }
  bool decreasing = true;
  for (std::size_t k = 1; k < rows.size(); ++k) {
    const double slack = 3.0 * std::hypot(rows[k].scaled_gap_sigma, rows[k - 1].scaled_gap_sigma);
    decreasing = decreasing && rows[k].scaled_gap(1, 1) <= rows[k - 1].scaled_gap(1, 1) + slack;
  }
  bands.push_back({"scaled gap (sigma, sigma) entry decreases with n", decreasing, ""});
  if (!rows.empty() && rows.back().c_n_oracle && rows.back().n >= 100) {
    bands.push_back({"scaled gap (sigma, sigma) entry below 0.02 at the largest n",
                     rows.back().scaled_gap(1, 1) < 0.02, fmt(rows.back().scaled_gap(1, 1))});
  }
  return bands;
}

}  // namespace wcr
