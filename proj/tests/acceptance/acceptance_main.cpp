// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Tolerances and budgets are fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "wcr/wcr.hpp"

using namespace wcr;

namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      detail << "[fail] " << what << "; ";
    }
  }
};

int failures = 0;

void run(int id, const char* title, double budget_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  o.detail.precision(6);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.passed = false;
    o.detail << "[exception] " << e.what() << "; ";
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= budget_s) {
    o.passed = false;
    o.detail << "[fail] runtime over budget; ";
  }
  if (!o.passed) ++failures;
  std::printf("AC%d %s  %s | %s| %.2f s (budget %.0f s)\n", id, o.passed ? "PASS" : "FAIL", title,
              o.detail.str().c_str(), secs, budget_s);
  std::fflush(stdout);
}

McConfig mc(std::size_t trials, std::uint64_t seed) {
  McConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

int main() {
  run(1, "score solver reproduces closed-form location-scale scores", 1.0, [](Outcome& o) {
    double worst_phi = 0.0, worst_dphi = 0.0;
    for (const auto& base : {gaussian_base(), laplace_base()}) {
      const auto f = make_location_scale(base);
      const ParameterPoint th{0.0, 1.0};
      const auto grid = score_grid(f, th, 512);
      for (auto which : {LsParam::Mu, LsParam::Sigma}) {
        const auto i = static_cast<std::size_t>(which);
        const auto solved = solve_score_1d(f, th, i);
        const auto exact = closed_form_score_ls(th, which);
        for (double x : grid) {
          worst_phi = std::max(worst_phi, std::abs(solved.phi(x) - exact.phi(x)));
          worst_dphi = std::max(worst_dphi, std::abs(solved.dphi(x) - exact.dphi(x)));
        }
      }
    }
    o.detail << "sup|Phi err| = " << worst_phi << ", sup|Phi' err| = " << worst_dphi << " ";
    o.require(worst_phi < 1e-6, "Phi error >= 1e-6");
    o.require(worst_dphi < 1e-6, "Phi' error >= 1e-6");
  });

  run(2, "information matrix is I (one observation) and nI (n observations)", 1.0, [](Outcome& o) {
    double worst1 = 0.0, worstn = 0.0;
    for (const auto& base : {gaussian_base(), laplace_base(), logistic_base()}) {
      const auto f = make_location_scale(base);
      for (const ParameterPoint& th : {ParameterPoint{0.0, 1.0}, ParameterPoint{-2.0, 0.3}, ParameterPoint{5.0, 4.0}}) {
        worst1 = std::max(worst1, info_matrix(f, th, 1).g.max_abs_diff(SymMatrix::identity(2)));
        for (std::size_t n : {10u, 100u}) {
          const auto g = info_matrix(f, th, n).g;
          worstn = std::max(worstn, g.max_abs_diff(SymMatrix::identity(2).scaled(static_cast<double>(n))));
        }
      }
    }
    o.detail << "max|G - I| = " << worst1 << ", max|G - nI| = " << worstn << " ";
    o.require(worst1 < 1e-8, "single-observation error >= 1e-8");
    o.require(worstn < 1e-8, "n-observation error >= 1e-8");
  });

  run(3, "Wasserstein variance identities of the Wasserstein estimator and the median", 10.0, [](Outcome& o) {
    double rel_mu = 0.0, rel_sigma = 0.0, cross = 0.0, med = 0.0;
    for (const auto& base : {gaussian_base(), laplace_base()}) {
      const auto f = make_location_scale(base);
      const ParameterPoint th{0.7, 1.9};
      for (std::size_t n : {5u, 11u, 101u}) {
        const auto w = wvariance_mc(wasserstein_statistic(), f, th, n, mc(2000, 31));
        const double target = 1.0 / static_cast<double>(n);
        rel_mu = std::max(rel_mu, std::abs(w.var(0, 0) - target) / target);
        rel_sigma = std::max(rel_sigma, std::abs(w.var(1, 1) - target) / target);
        cross = std::max(cross, std::abs(w.var(0, 1)));
        const auto m = wvariance_mc(median_statistic(), f, th, n, mc(2000, 32));
        med = std::max(med, std::abs(m.var(0, 0) - 1.0));
      }
    }
    o.detail << "rel err mu " << rel_mu << ", sigma " << rel_sigma << ", |cross| " << cross << ", median "
             << med << " ";
    o.require(rel_mu < 1e-12, "Var^W[mu_hat] != 1/n");
    o.require(rel_sigma < 1e-12, "Var^W[sigma_hat] != 1/n");
    o.require(cross < 1e-15, "cross term != 0");
    o.require(med < 1e-15, "Var^W[median] != 1");
  });

  run(4, "asymptotic efficiency sweep, Gaussian base", 30.0, [](Outcome& o) {
    const auto rows = asymptotic_efficiency_sweep(gaussian_base(), ParameterPoint{0.0, 1.0}, {5, 10, 20, 50, 100},
                                                  mc(50000, 41));
    for (const auto& r : rows) {
      const double oracle = chi_moment_cn(r.n);
      o.detail << "n=" << r.n << ": c_n " << r.c_n << " (oracle " << oracle << ", se " << r.c_n_se
               << "), gap22 " << r.scaled_gap(1, 1) << "; ";
      o.require(std::abs(r.c_n - oracle) <= 3.0 * r.c_n_se, "c_n outside 3 sigma at n=" + std::to_string(r.n));
      o.require(std::abs(r.scaled_gap(0, 0)) <= 1e-12, "scaled gap (1,1) entry nonzero");
    }
    const double first_oracle = 1.0 - chi_moment_cn(5) * chi_moment_cn(5);
    o.require(std::abs(rows.front().scaled_gap(1, 1) - first_oracle) <= 3.0 * rows.front().scaled_gap_sigma,
              "scaled gap at n=5 not at 1 - c_5^2");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      const double slack = 3.0 * std::hypot(rows[k].scaled_gap_sigma, rows[k - 1].scaled_gap_sigma);
      o.require(rows[k].scaled_gap(1, 1) <= rows[k - 1].scaled_gap(1, 1) + slack, "scaled gap not decreasing");
    }
    o.require(rows.back().scaled_gap(1, 1) < 0.02, "scaled gap at n=100 not below 0.02");
  });

  run(5, "WCR inequality battery, 10 pairs x 5 parameter points", 120.0, [](Outcome& o) {
    struct Pair {
      ParametricFamily1D family;
      Statistic stat;
      std::function<ParameterPoint(std::mt19937_64&)> draw;
    };
    std::uniform_real_distribution<double> loc(-3.0, 3.0), logscale(-1.0, 1.0), t(-1.0, 1.0);
    auto ls_point = [&](std::mt19937_64& e) { return ParameterPoint{loc(e), std::exp(logscale(e))}; };
    auto loc_point = [&](std::mt19937_64& e) { return ParameterPoint{loc(e)}; };
    auto scale_point = [&](std::mt19937_64& e) { return ParameterPoint{std::exp(logscale(e))}; };
    auto t_point = [&](std::mt19937_64& e) { return ParameterPoint{t(e)}; };
    const std::vector<Pair> pairs{
        {make_location_scale(gaussian_base()), wasserstein_statistic(), ls_point},
        {make_location_scale(laplace_base()), wasserstein_statistic(), ls_point},
        {make_location_scale(logistic_base()), wasserstein_statistic(), ls_point},
        {make_location(gaussian_base()), sample_mean_statistic(), loc_point},
        {make_location(laplace_base()), median_statistic(), loc_point},
        {make_scale(gaussian_base()), mean_of_squares_statistic(), scale_point},
        {make_scale(laplace_base()), sample_std_statistic(), scale_point},
        {make_location(logistic_base()), mean_of_squares_statistic(), loc_point},
        {make_scale(gaussian_base()), sample_mean_statistic(), scale_point},
        {make_curve(gaussian_base(), {0.0, 1.0}, {1.0, 0.0, 1.0}), sample_mean_statistic(), t_point},
    };
    std::mt19937_64 eng(51);
    double worst = std::numeric_limits<double>::infinity();
    int checked = 0;
    for (std::size_t k = 0; k < pairs.size(); ++k) {
      for (int rep = 0; rep < 5; ++rep) {
        const ParameterPoint th = pairs[k].draw(eng);
        const auto r = efficiency_gap(pairs[k].family, th, pairs[k].stat, 10, mc(4000, 100 + 10 * k + rep));
        const double floor = 3.0 * r.gap_sigma + 1e-10 * std::abs(r.var_w.var.trace());
        const double margin = r.gap_min_eig + floor;
        worst = std::min(worst, margin);
        ++checked;
        if (margin < 0.0) {
          o.require(false, pairs[k].family.name() + "/" + pairs[k].stat.name() + " min eig " +
                               std::to_string(r.gap_min_eig) + " < -3 sigma");
        }
      }
    }
    o.detail << checked << " cases, smallest (min eig + 3 sigma) = " << worst << " ";
  });

  run(6, "equality cases by affine score relation; strict gap for the mean under scale", 60.0, [](Outcome& o) {
    double worst_res = 0.0, worst_rel = 0.0;
    for (const auto& base : {gaussian_base(), laplace_base(), logistic_base()}) {
      const auto loc = make_location(base);
      const auto sc = make_scale(base);
      for (double v : {-2.0, -0.5, 0.0, 1.0, 3.0}) {
        const auto a = efficiency_quadrature(loc, ParameterPoint{v}, power_statistic(1));
        const auto b = efficiency_quadrature(sc, ParameterPoint{std::exp(0.4 * v)}, power_statistic(2));
        for (const auto* r : {&a, &b}) {
          worst_res = std::max(worst_res, r->affine.residual);
          worst_rel = std::max(worst_rel, std::abs(r->relative_gap));
          o.require(r->attained, "equality case not attained");
        }
      }
    }
    o.detail << "max affine residual " << worst_res << ", max relative gap " << worst_rel << "; ";
    o.require(worst_res < 1e-8, "affine residual >= 1e-8");
    o.require(worst_rel < 1e-6, "relative gap >= 1e-6");

    const auto sc = make_scale(gaussian_base());
    double worst_z = std::numeric_limits<double>::infinity();
    int k = 0;
    for (double th : {0.3, 0.8, 1.0, 2.0, 5.0}) {
      const auto r = efficiency_gap(sc, ParameterPoint{th}, sample_mean_statistic(), 10, mc(4000, 60 + k++));
      worst_z = std::min(worst_z, r.gap_min_eig / r.gap_sigma);
    }
    o.detail << "mean under Gaussian scale: min gap / sigma = " << worst_z << " ";
    o.require(worst_z > 10.0, "gap not > 10 MC sigma");
  });

  run(7, "Laplace noise robustness at sigma=1, n=1001, 2e5 trials", 120.0, [](Outcome& o) {
    const auto r = laplace_robustness(1.0, 1001, {0.05, 0.1, 0.2}, mc(200000, 71), true);
    for (const auto& b : robustness_bands(r)) {
      if (!b.passed) o.require(false, b.name + " (" + b.detail + ")");
    }
    o.detail << "clean Var W " << r.var_w_clean.mean << ", clean Var ML " << r.var_ml_clean.mean << "; ";
    for (const auto& c : r.cells) {
      o.detail << "eps " << c.eps << ": ML slope " << c.slope_ml << " vs " << c.predicted_slope_ml
               << " (finite-n exact " << c.exact_slope_ml << "); ";
    }
  });

  run(8, "convolved Laplace density at the median: closed form, quadrature, slope", 5.0, [](Outcome& o) {
    double worst = 0.0;
    for (double sigma : {0.5, 1.0, 2.0}) {
      const double b = sigma / std::numbers::sqrt2;
      for (int k = 0; k <= 10; ++k) {
        const double eps = 0.05 * k * sigma;
        const double closed = convolved_laplace_median_density(sigma, eps);
        double direct;
        if (eps == 0.0) {
          direct = 1.0 / (2.0 * b);
        } else {
          auto integrand = [&](double x) {
            return std::exp(-std::abs(x) / b) / (2.0 * b) * gaussian_pdf(-x / eps) / eps;
          };
          direct = integrate(integrand, Interval{-40.0 * eps, 40.0 * eps}, {0.0});
        }
        worst = std::max(worst, std::abs(closed - direct));
      }
    }
    o.detail << "max |closed - quadrature| = " << worst << "; ";
    o.require(worst <= 1e-8, "closed form and quadrature differ by more than 1e-8");
    double worst_slope = 0.0;
    for (double sigma : {0.5, 1.0, 2.0}) {
      const double p0 = convolved_laplace_median_density(sigma, 0.0);
      const double slope = richardson_limit(
          [&](double h) { return (convolved_laplace_median_density(sigma, h) - p0) / h; }, 0.05 * sigma, 6);
      const double target = -std::numbers::sqrt2 / (std::sqrt(std::numbers::pi) * sigma * sigma);
      worst_slope = std::max(worst_slope, std::abs(slope - target));
    }
    o.detail << "max |slope - target| = " << worst_slope << " ";
    o.require(worst_slope <= 1e-4, "slope at 0 off by more than 1e-4");
  });

  run(9, "quadratic approximation of W2 for Gaussian location-scale", 5.0, [](Outcome& o) {
    const auto f = make_location_scale(gaussian_base());
    double worst = 0.0;
    for (const ParameterPoint& th : {ParameterPoint{0.0, 1.0}, ParameterPoint{1.5, 0.5}}) {
      const auto rows = quadratic_approx_check(
          f, th, {{1e-2, 0.0}, {-1e-2, 0.0}, {0.0, 1e-2}, {0.0, -1e-2}, {0.6e-2, 0.8e-2}, {-0.8e-2, 0.6e-2}});
      for (const auto& r : rows) worst = std::max(worst, std::abs(r.ratio - 1.0));
    }
    o.detail << "max |ratio - 1| = " << worst << " ";
    o.require(worst < 1e-3, "ratio off by 1e-3 or more");
  });

  std::printf("%d of 9 acceptance criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
