#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wcr/estimators.hpp"
#include "wcr/families.hpp"
#include "wcr/numerics/finite_diff.hpp"
#include "wcr/numerics/monte_carlo.hpp"
#include "wcr/numerics/sym_matrix.hpp"
#include "wcr/winfo.hpp"
#include "wcr/wscore.hpp"

namespace wcr {

/// Relative gap below which a quadrature-based scalar check counts as attained.
inline constexpr double kAttainRelTol = 1e-6;

/// Least-squares fit grad a = u grad Phi in L2(p_theta).
struct AffineFit {
  double u = 0.0;
  double v = 0.0;
  double residual = 0.0;  // E[(a' - u Phi')^2] / E[a'^2]
  bool constant_statistic = false;
};

/// Checks a(x) = u Phi(x; theta) + v for a single-observation statistic.
inline AffineFit check_affine_in_score(const PointStatistic& a, const WassersteinScore& s,
                                       const ParametricFamily1D& family, const ParameterPoint& theta,
                                       const Quadrature& q = {}) {
  family.validate(theta);
  const double norm = expect(family, theta, [&](double x) { return a.derivative(x) * a.derivative(x); }, q);
  const double mean_a = expect(family, theta, a.value, q);
  if (norm == 0.0) return {0.0, mean_a, 0.0, true};
  const double g = expect(family, theta, [&](double x) { return s.dphi(x) * s.dphi(x); }, q);
  const double cross = expect(family, theta, [&](double x) { return a.derivative(x) * s.dphi(x); }, q);
  AffineFit fit;
  fit.u = cross / g;
  fit.v = mean_a - fit.u * expect(family, theta, [&](double x) { return s.phi(x); }, q);
  fit.residual = expect(
                     family, theta,
                     [&](double x) {
                       const double r = a.derivative(x) - fit.u * s.dphi(x);
                       return r * r;
                     },
                     q) /
                 norm;
  return fit;
}

/// Single-observation efficiency of a scalar statistic in a one-parameter
/// family, entirely by quadrature.
struct ScalarEfficiency {
  double var_w = 0.0;
  double dexp = 0.0;     // d/dtheta E[a] by the interchange identity E[a' Phi']
  double dexp_fd = 0.0;  // same by central differences of E_theta[a]
  double g_w = 0.0;
  double bound = 0.0;
  double gap = 0.0;
  double relative_gap = 0.0;
  bool attained = false;
  AffineFit affine;
};

inline ScalarEfficiency efficiency_quadrature(const ParametricFamily1D& family, const ParameterPoint& theta,
                                              const PointStatistic& a, const Quadrature& q = {}) {
  family.validate(theta);
  if (family.param_dim() != 1) throw DomainError("efficiency_quadrature: one-parameter family required");
  const WassersteinScore s = score(family, theta, 0, q);
  ScalarEfficiency r;
  r.var_w = expect(family, theta, [&](double x) { return a.derivative(x) * a.derivative(x); }, q);
  r.dexp = expect(family, theta, [&](double x) { return a.derivative(x) * s.dphi(x); }, q);
  r.dexp_fd = central_diff([&](double t) { return expect(family, ParameterPoint{t}, a.value, q); }, theta[0]);
  if (std::abs(r.dexp - r.dexp_fd) > 1e-6 * (1.0 + std::abs(r.dexp))) {
    std::ostringstream os;
    os << "efficiency_quadrature: dE/dtheta disagrees between the interchange identity (" << r.dexp
       << ") and finite differences (" << r.dexp_fd << ")";
    throw RegularityError(os.str());
  }
  r.g_w = info_matrix(family, theta, 1, q).g(0, 0);
  if (!(r.g_w > 0.0)) throw DomainError("efficiency_quadrature: G_W is singular");
  r.bound = r.dexp * r.dexp / r.g_w;
  r.gap = r.var_w - r.bound;
  r.relative_gap = r.var_w > 0.0 ? r.gap / r.var_w : 0.0;
  r.attained = std::abs(r.relative_gap) < kAttainRelTol;
  r.affine = check_affine_in_score(a, s, family, theta, q);
  return r;
}

/// Monte Carlo efficiency of an n-sample statistic.
struct EfficiencyReport {
  std::string statistic;
  std::size_t n = 1;
  ParameterPoint theta;
  std::size_t trials = 0;

  WVarMatrix var_w;
  InfoMatrix info;
  Eigen::MatrixXd dexp;  // p x l, interchange identity E[(grad a_j) . (grad Phi_i)]
  Eigen::MatrixXd dexp_se;
  Eigen::MatrixXd dexp_fd;  // p x l, finite differences with common random numbers
  Eigen::MatrixXd dexp_fd_se;
  std::vector<double> mean_value;  // E[a]

  SymMatrix bound;
  SymMatrix gap;
  double gap_min_eig = 0.0;
  double gap_sigma = 0.0;  // MC standard error of gap_min_eig
  bool attained = false;
  std::optional<AffineFit> affine_fit;  // one parameter, scalar statistic
};

namespace detail {

struct EfficiencyLayout {
  std::size_t p, l;
  std::size_t gram() const { return 0; }
  std::size_t dint() const { return l * (l + 1) / 2; }
  std::size_t dfd() const { return dint() + p * l; }
  std::size_t value() const { return dfd() + p * l; }
  std::size_t score_norm() const { return value() + l; }
  std::size_t total() const { return score_norm() + 1; }
};

}  // namespace detail

/// Var^W, the WCR bound and their gap for `stat` on n-samples, from one Monte
/// Carlo pass. dE[a]/dtheta is computed twice (interchange identity and
/// common-random-number finite differences); a disagreement beyond 3 MC
/// sigmas raises RegularityError.
inline EfficiencyReport efficiency_gap(const ParametricFamily1D& family, const ParameterPoint& theta,
                                       const Statistic& stat, std::size_t n, const McConfig& cfg,
                                       const Quadrature& q = {}) {
  family.validate(theta);
  if (n == 0) throw DomainError("efficiency_gap: n must be >= 1");
  const std::size_t p = family.param_dim();
  const std::size_t l = stat.dim();
  const detail::EfficiencyLayout lay{p, l};
  const std::vector<WassersteinScore> sc = scores(family, theta, q);
  std::vector<double> steps(p);
  for (std::size_t i = 0; i < p; ++i) steps[i] = default_step(theta[i]);

  const McSamples s = run_trials(cfg, lay.total(), [&](TrialStream& rng, std::span<double> out) {
    std::vector<double> u(n), x(n), xs(n);
    for (double& v : u) v = rng.uniform();
    for (std::size_t t = 0; t < n; ++t) x[t] = family.quantile(u[t], theta);
    Eigen::MatrixXd g;
    try {
      g = stat.gradient(x);
    } catch (const RegularityError&) {
      return false;
    }
    if (!g.allFinite()) return false;

    std::size_t k = lay.gram();
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i; j < l; ++j)
        out[k++] = g.row(static_cast<Eigen::Index>(i)).dot(g.row(static_cast<Eigen::Index>(j)));

    double score_norm = 0.0;
    for (std::size_t i = 0; i < p; ++i) {
      Eigen::VectorXd dphi(static_cast<Eigen::Index>(n));
      for (std::size_t t = 0; t < n; ++t) dphi(static_cast<Eigen::Index>(t)) = sc[i].dphi(x[t]);
      if (i == 0) score_norm = dphi.squaredNorm();
      const Eigen::VectorXd d = g * dphi;
      for (std::size_t j = 0; j < l; ++j) out[lay.dint() + i * l + j] = d(static_cast<Eigen::Index>(j));

      const double h = steps[i];
      for (std::size_t t = 0; t < n; ++t) xs[t] = family.quantile(u[t], theta.with(i, theta[i] + h));
      const std::vector<double> ap = stat.value(xs);
      for (std::size_t t = 0; t < n; ++t) xs[t] = family.quantile(u[t], theta.with(i, theta[i] - h));
      const std::vector<double> am = stat.value(xs);
      for (std::size_t j = 0; j < l; ++j) out[lay.dfd() + i * l + j] = (ap[j] - am[j]) / (2.0 * h);
    }
    const std::vector<double> a = stat.value(x);
    for (std::size_t j = 0; j < l; ++j) out[lay.value() + j] = a[j];
    out[lay.score_norm()] = score_norm;
    return true;
  });

  if (s.invalid_fraction() > kMaxDegenerateFraction) {
    std::ostringstream os;
    os << "efficiency_gap: gradient of '" << stat.name() << "' undefined on " << 100.0 * s.invalid_fraction()
       << "% of draws (degenerate statistic)";
    throw RegularityError(os.str());
  }

  EfficiencyReport r;
  r.statistic = stat.name();
  r.n = n;
  r.theta = theta;
  r.trials = s.valid_count();

  const auto li = static_cast<Eigen::Index>(l);
  const auto pi = static_cast<Eigen::Index>(p);
  SymMatrix var(l);
  Eigen::MatrixXd var_se(li, li);
  std::size_t k = lay.gram();
  for (std::size_t i = 0; i < l; ++i) {
    for (std::size_t j = i; j < l; ++j, ++k) {
      const McEstimate e = s.estimate(k);
      var.set(i, j, e.mean);
      var_se(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e.std_error;
      var_se(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = e.std_error;
    }
  }
  r.var_w = {var, n, var_se};

  r.dexp.resize(pi, li);
  r.dexp_se.resize(pi, li);
  r.dexp_fd.resize(pi, li);
  r.dexp_fd_se.resize(pi, li);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < l; ++j) {
      const auto ii = static_cast<Eigen::Index>(i);
      const auto jj = static_cast<Eigen::Index>(j);
      const McEstimate a = s.estimate(lay.dint() + i * l + j);
      const McEstimate b = s.estimate(lay.dfd() + i * l + j);
      r.dexp(ii, jj) = a.mean;
      r.dexp_se(ii, jj) = a.std_error;
      r.dexp_fd(ii, jj) = b.mean;
      r.dexp_fd_se(ii, jj) = b.std_error;
      const double allowed = 3.0 * std::max(a.std_error, b.std_error) + 1e-6 * (1.0 + std::abs(a.mean));
      if (std::abs(a.mean - b.mean) > allowed) {
        std::ostringstream os;
        os << "efficiency_gap: dE[a_" << j << "]/dtheta_" << i << " disagrees between the interchange identity ("
           << a.mean << " +- " << a.std_error << ") and finite differences (" << b.mean << " +- " << b.std_error
           << ")";
        throw RegularityError(os.str());
      }
    }
  }
  for (std::size_t j = 0; j < l; ++j) r.mean_value.push_back(s.estimate(lay.value() + j).mean);

  r.info = info_matrix(family, theta, n, q);
  const SymMatrix ginv = r.info.g.inverse();
  const Eigen::MatrixXd& G = ginv.matrix();
  r.bound = SymMatrix::from_upper(r.dexp.transpose() * G * r.dexp);
  r.gap = r.var_w.var - r.bound;
  r.gap_min_eig = r.gap.min_eigenvalue();

  // Delta-method error of v^T gap v along the bottom eigenvector, plus the
  // second-order term from noise in dE/dtheta entering the bound quadratically.
  const Eigen::VectorXd v = r.gap.min_eigenvector();
  const Eigen::VectorXd lin = G * r.dexp * v;
  const McEstimate along = s.estimate_of([&](std::span<const double> row) {
    Eigen::MatrixXd gram(li, li);
    std::size_t kk = lay.gram();
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = i; j < l; ++j, ++kk) {
        gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[kk];
        gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = row[kk];
      }
    Eigen::MatrixXd d(pi, li);
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = 0; j < l; ++j)
        d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[lay.dint() + i * l + j];
    return v.dot(gram * v) - 2.0 * (d * v).dot(lin);
  });
  double quad = 0.0;
  for (Eigen::Index i = 0; i < pi; ++i) {
    double s2 = 0.0;
    for (Eigen::Index j = 0; j < li; ++j) s2 += r.dexp_se(i, j) * r.dexp_se(i, j) * v(j) * v(j);
    quad += G(i, i) * s2;
  }
  r.gap_sigma = std::hypot(along.std_error, quad);
  r.attained = r.gap.max_abs_eigenvalue() <= 3.0 * r.gap_sigma + 1e-10 * std::abs(r.var_w.var.trace());

  if (p == 1 && l == 1) {
    const double grad_sq = r.var_w.var(0, 0);
    if (grad_sq == 0.0) {
      r.affine_fit = AffineFit{0.0, r.mean_value[0], 0.0, true};
    } else {
      const double cross = r.dexp(0, 0);
      const double score_sq = s.estimate(lay.score_norm()).mean;
      AffineFit fit;
      fit.u = cross / score_sq;
      fit.v = r.mean_value[0];  // E[Phi^(n)] = 0
      fit.residual = std::max(0.0, 1.0 - cross * cross / (grad_sq * score_sq));
      r.affine_fit = fit;
    }
  }
  return r;
}

/// Right-hand side of the WCR inequality, (dE/dtheta)^T G_W^-1 (dE/dtheta).
inline SymMatrix wcr_bound(const ParametricFamily1D& family, const ParameterPoint& theta, const Statistic& stat,
                           std::size_t n, const McConfig& cfg, const Quadrature& q = {}) {
  return efficiency_gap(family, theta, stat, n, cfg, q).bound;
}

/// Threshold on pairwise affinity residuals for the e-geodesic verdict.
inline constexpr double kGeodesicTol = 1e-6;

struct GeodesicResult {
  bool is_geodesic_up_to_reparam = false;
  Eigen::MatrixXd pairwise_affinity;  // residual of Phi(.; theta_b) ~ alpha Phi(.; theta_a) + beta
  Eigen::MatrixXd slope;              // alpha
};

/// Checks whether the scores Phi(.; theta_k) of a one-parameter family are
/// pairwise affinely related, in L2 of p(.; theta_list.front()).
inline GeodesicResult check_e_geodesic(const ParametricFamily1D& family, const std::vector<double>& thetas,
                                       const Quadrature& q = {}) {
  if (family.param_dim() != 1) throw DomainError("check_e_geodesic: one-parameter family required");
  if (thetas.size() < 2) throw DomainError("check_e_geodesic: need at least two parameter values");
  const ParameterPoint ref{thetas.front()};
  family.validate(ref);
  std::vector<WassersteinScore> sc;
  for (double t : thetas) sc.push_back(score(family, ParameterPoint{t}, 0, q));

  const auto k = static_cast<Eigen::Index>(thetas.size());
  GeodesicResult r;
  r.pairwise_affinity = Eigen::MatrixXd::Zero(k, k);
  r.slope = Eigen::MatrixXd::Identity(k, k);
  const Interval ref_window = family.window(ref);
  const double m = family.median(ref);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) {
      if (a == b) continue;
      const auto& sa = sc[static_cast<std::size_t>(a)];
      const auto& sb = sc[static_cast<std::size_t>(b)];
      const Interval w{std::max({ref_window.lo, sa.domain().lo, sb.domain().lo}),
                       std::min({ref_window.hi, sa.domain().hi, sb.domain().hi})};
      auto E = [&](auto&& g) {
        return integrate([&](double x) { return g(x) * family.pdf(x, ref); }, w, {m}, q);
      };
      const double ea = E([&](double x) { return sa.phi(x); });
      const double eb = E([&](double x) { return sb.phi(x); });
      const double va = E([&](double x) { return (sa.phi(x) - ea) * (sa.phi(x) - ea); });
      const double vb = E([&](double x) { return (sb.phi(x) - eb) * (sb.phi(x) - eb); });
      const double cab = E([&](double x) { return (sa.phi(x) - ea) * (sb.phi(x) - eb); });
      const double alpha = va > 0.0 ? cab / va : 0.0;
      const double res = E([&](double x) {
        const double e = (sb.phi(x) - eb) - alpha * (sa.phi(x) - ea);
        return e * e;
      });
      r.slope(a, b) = alpha;
      r.pairwise_affinity(a, b) = vb > 0.0 ? res / vb : 0.0;
    }
  }
  r.is_geodesic_up_to_reparam = r.pairwise_affinity.maxCoeff() < kGeodesicTol;
  return r;
}

}  // namespace wcr
