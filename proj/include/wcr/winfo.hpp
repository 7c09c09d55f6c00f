#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wcr/estimators.hpp"
#include "wcr/families.hpp"
#include "wcr/numerics/monte_carlo.hpp"
#include "wcr/numerics/quadrature.hpp"
#include "wcr/numerics/sym_matrix.hpp"
#include "wcr/wscore.hpp"

namespace wcr {

/// G_W(theta) for n_obs i.i.d. observations.
struct InfoMatrix {
  SymMatrix g;
  ParameterPoint theta;
  std::size_t n_obs = 1;
};

/// Wasserstein variance of an l-dimensional statistic.
struct WVarMatrix {
  SymMatrix var;
  std::size_t n_obs = 1;
  Eigen::MatrixXd std_error;  // per entry; zero for quadrature results
};

/// G_W(theta)_ij = n_obs * int (dF/dtheta_i)(dF/dtheta_j) / p dx. The single
/// observation matrix is computed once and scaled, so the result is exactly
/// linear in n_obs.
inline InfoMatrix info_matrix(const ParametricFamily1D& family, const ParameterPoint& theta, std::size_t n_obs = 1,
                              const Quadrature& q = {}) {
  family.validate(theta);
  if (n_obs == 0) throw DomainError("info_matrix: n_obs must be >= 1");
  const std::size_t p = family.param_dim();
  const Interval w = family.window(theta);
  const double m = family.median(theta);
  SymMatrix g(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = i; j < p; ++j) {
      const double v = integrate(
          [&](double x) {
            const double dens = family.pdf(x, theta);
            if (!(dens >= std::numeric_limits<double>::min())) {
              std::ostringstream os;
              os << "info_matrix: pdf underflow at x=" << x;
              throw DomainError(os.str());
            }
            return family.dtheta_cdf(x, theta, i) * family.dtheta_cdf(x, theta, j) / dens;
          },
          w, {m}, q);
      g.set(i, j, v);
    }
  }
  return {g.scaled(static_cast<double>(n_obs)), theta, n_obs};
}

/// Same matrix from the score route: n_obs * E[dphi_i dphi_j].
inline InfoMatrix info_matrix_from_scores(const ParametricFamily1D& family, const ParameterPoint& theta,
                                          const std::vector<WassersteinScore>& scores, std::size_t n_obs = 1,
                                          const Quadrature& q = {}) {
  family.validate(theta);
  const std::size_t p = scores.size();
  SymMatrix g(p);
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i; j < p; ++j)
      g.set(i, j, expect(family, theta, [&](double x) { return scores[i].dphi(x) * scores[j].dphi(x); }, q));
  return {g.scaled(static_cast<double>(n_obs)), theta, n_obs};
}

/// Var^W of a single-observation statistic whose components have derivatives
/// `grads[k]`: entry (i, j) = E[a_i'(x) a_j'(x)].
inline WVarMatrix wvariance_quadrature(const std::vector<std::function<double(double)>>& grads,
                                       const ParametricFamily1D& family, const ParameterPoint& theta,
                                       const Quadrature& q = {}) {
  family.validate(theta);
  const std::size_t l = grads.size();
  SymMatrix v(l);
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = i; j < l; ++j)
      v.set(i, j, expect(family, theta, [&](double x) { return grads[i](x) * grads[j](x); }, q));
  const auto li = static_cast<Eigen::Index>(l);
  return {v, 1, Eigen::MatrixXd::Zero(li, li)};
}

/// Largest fraction of draws on which a statistic may lack a gradient before
/// an MC estimate is refused.
inline constexpr double kMaxDegenerateFraction = 1e-3;

/// Var^W of an n-sample statistic by Monte Carlo: the mean over draws of the
/// Gram matrix of its R^n gradient.
inline WVarMatrix wvariance_mc(const Statistic& stat, const ParametricFamily1D& family, const ParameterPoint& theta,
                               std::size_t n, const McConfig& cfg) {
  family.validate(theta);
  if (n == 0) throw DomainError("wvariance_mc: n must be >= 1");
  const std::size_t l = stat.dim();
  const std::size_t outputs = l * (l + 1) / 2;
  const McSamples s = run_trials(cfg, outputs, [&](TrialStream& rng, std::span<double> out) {
    std::vector<double> x(n);
    sample_into(family, theta, rng, x);
    Eigen::MatrixXd g;
    try {
      g = stat.gradient(x);
    } catch (const RegularityError&) {
      return false;
    }
    if (!g.allFinite()) return false;
    std::size_t k = 0;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i; j < l; ++j)
        out[k++] = g.row(static_cast<Eigen::Index>(i)).dot(g.row(static_cast<Eigen::Index>(j)));
    return true;
  });
  if (s.invalid_fraction() > kMaxDegenerateFraction) {
    std::ostringstream os;
    os << "wvariance_mc: gradient of '" << stat.name() << "' undefined on " << 100.0 * s.invalid_fraction()
       << "% of draws (degenerate statistic)";
    throw RegularityError(os.str());
  }
  SymMatrix v(l);
  const auto li = static_cast<Eigen::Index>(l);
  Eigen::MatrixXd se(li, li);
  std::size_t k = 0;
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i; j < l; ++j, ++k) {
      const McEstimate e = s.estimate(k);
      v.set(i, j, e.mean);
      se(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.std_error;
      se(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = e.std_error;
    }
  }
  return {v, n, se};
}

struct W2Result {
  double distance = 0.0;        // sqrt(squared)
  double squared = 0.0;         // (1/2) int_0^1 (Q_p - Q_q)^2 du
  double transport_cost = 0.0;  // int_0^1 (Q_p - Q_q)^2 du, no 1/2
  double tail_bound = 0.0;      // rough size of the clipped quantile tails
  std::string warning;          // non-empty when the clip had to be widened
};

/// W2 between two one-dimensional laws by the quantile coupling, with the
/// convention W2^2 = (1/2) inf E|X - Y|^2.
inline W2Result w2_distance_1d(const ParametricFamily1D& fp, const ParameterPoint& tp, const ParametricFamily1D& fq,
                               const ParameterPoint& tq, const Quadrature& q = {}) {
  fp.validate(tp);
  fq.validate(tq);
  auto diff2 = [&](double u) {
    const double d = fp.quantile(u, tp) - fq.quantile(u, tq);
    return d * d;
  };
  auto cost_on = [&](double clip) {
    return integrate(diff2, Interval{clip, 1.0 - clip}, {0.5}, q);
  };
  W2Result r;
  double clip = kTailMass;
  try {
    r.transport_cost = cost_on(clip);
  } catch (const QuadratureError&) {
    clip = 1e-10;
    r.transport_cost = cost_on(clip);
    r.warning = "quantile integral did not converge near u in {0, 1}; tails clipped at 1e-10";
  }
  r.tail_bound = clip * (diff2(clip) + diff2(1.0 - clip));
  r.squared = 0.5 * r.transport_cost;
  r.distance = std::sqrt(r.squared);
  return r;
}

inline W2Result w2_distance_1d(const ParametricFamily1D& family, const ParameterPoint& t1, const ParameterPoint& t2,
                               const Quadrature& q = {}) {
  return w2_distance_1d(family, t1, family, t2, q);
}

struct QuadraticApproxRow {
  std::vector<double> delta;
  double norm = 0.0;
  double w2_squared = 0.0;
  double quadratic_form = 0.0;  // (1/2) delta^T G_W delta
  double ratio = 0.0;
};

/// Ratio W2(p_theta, p_{theta+delta})^2 / ((1/2) delta^T G_W delta) per delta.
inline std::vector<QuadraticApproxRow> quadratic_approx_check(const ParametricFamily1D& family,
                                                              const ParameterPoint& theta,
                                                              const std::vector<std::vector<double>>& deltas,
                                                              const Quadrature& q = {}) {
  const InfoMatrix info = info_matrix(family, theta, 1, q);
  const std::size_t p = family.param_dim();
  std::vector<QuadraticApproxRow> rows;
  for (const auto& d : deltas) {
    if (d.size() != p) throw DomainError("quadratic_approx_check: delta has the wrong dimension");
    Eigen::VectorXd v(static_cast<Eigen::Index>(p));
    std::vector<double> moved(p);
    for (std::size_t i = 0; i < p; ++i) {
      v(static_cast<Eigen::Index>(i)) = d[i];
      moved[i] = theta[i] + d[i];
    }
    if (v.norm() == 0.0) throw DomainError("quadratic_approx_check: delta must be nonzero");
    QuadraticApproxRow row;
    row.delta = d;
    row.norm = v.norm();
    row.w2_squared = w2_distance_1d(family, theta, ParameterPoint(moved), q).squared;
    row.quadratic_form = 0.5 * v.dot(info.g.matrix() * v);
    row.ratio = row.w2_squared / row.quadratic_form;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wcr
