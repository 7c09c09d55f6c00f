#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "wcr/numerics/error.hpp"
#include "wcr/numerics/finite_diff.hpp"
#include "wcr/numerics/monte_carlo.hpp"
#include "wcr/numerics/quadrature.hpp"
#include "wcr/numerics/special.hpp"

namespace wcr {

/// Probability mass left out of each tail when an expectation over an
/// unbounded support is evaluated on a finite window.
inline constexpr double kTailMass = 1e-15;

/// Parameter vector theta in R^p.
class ParameterPoint {
 public:
  ParameterPoint() = default;
  ParameterPoint(std::initializer_list<double> v) : values_(v) {}
  explicit ParameterPoint(std::vector<double> v) : values_(std::move(v)) {}

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const { return values_.at(i); }
  std::span<const double> values() const noexcept { return values_; }

  /// Copy with coordinate i replaced.
  ParameterPoint with(std::size_t i, double v) const {
    ParameterPoint r = *this;
    r.values_.at(i) = v;
    return r;
  }

  friend bool operator==(const ParameterPoint&, const ParameterPoint&) = default;

 private:
  std::vector<double> values_;
};

/// One-dimensional density on R used as the building block of location and
/// scale families.
struct BaseDensity {
  std::string name;
  std::function<double(double)> pdf;
  std::function<double(double)> cdf;
  std::function<double(double)> quantile;
  double mean = 0.0;
  double variance = 1.0;
  Interval support{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  bool symmetric = false;
  bool pdf_derived = false;  // pdf obtained by differentiating a tabulated cdf
};

/// Standard normal.
inline BaseDensity gaussian_base() {
  BaseDensity b;
  b.name = "gaussian";
  b.pdf = [](double x) { return gaussian_pdf(x); };
  b.cdf = [](double x) { return gaussian_cdf(x); };
  b.quantile = [](double u) { return gaussian_quantile(u); };
  b.symmetric = true;
  return b;
}

/// Laplace with unit variance: f(x) = exp(-sqrt2 |x|) / sqrt2.
inline BaseDensity laplace_base() {
  constexpr double r2 = std::numbers::sqrt2;
  BaseDensity b;
  b.name = "laplace";
  b.pdf = [](double x) { return std::exp(-r2 * std::abs(x)) / r2; };
  b.cdf = [](double x) {
    return x < 0.0 ? 0.5 * std::exp(r2 * x) : 1.0 - 0.5 * std::exp(-r2 * x);
  };
  b.quantile = [](double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("laplace quantile: u must lie in (0, 1)");
    return u < 0.5 ? std::log(2.0 * u) / r2 : -std::log(2.0 * (1.0 - u)) / r2;
  };
  b.symmetric = true;
  return b;
}

/// Logistic rescaled to unit variance (scale sqrt3 / pi).
inline BaseDensity logistic_base() {
  const double s = std::numbers::sqrt3 / std::numbers::pi;
  BaseDensity b;
  b.name = "logistic";
  b.pdf = [s](double x) {
    const double e = std::exp(-std::abs(x) / s);
    return e / (s * (1.0 + e) * (1.0 + e));
  };
  b.cdf = [s](double x) {
    const double e = std::exp(-std::abs(x) / s);
    return x >= 0.0 ? 1.0 / (1.0 + e) : e / (1.0 + e);
  };
  b.quantile = [s](double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("logistic quantile: u must lie in (0, 1)");
    return s * (std::log(u) - std::log1p(-u));
  };
  b.symmetric = true;
  return b;
}

namespace detail {

// Monotone piecewise-cubic Hermite interpolant of a tabulated cdf.
struct CdfTable {
  std::vector<double> x, f, m;

  std::size_t segment(double t) const {
    auto it = std::upper_bound(x.begin(), x.end(), t);
    std::size_t k = static_cast<std::size_t>(it - x.begin());
    return std::clamp<std::size_t>(k == 0 ? 0 : k - 1, 0, x.size() - 2);
  }

  double value(double t) const {
    if (t <= x.front()) return 0.0;
    if (t >= x.back()) return 1.0;
    const std::size_t k = segment(t);
    const double h = x[k + 1] - x[k];
    const double s = (t - x[k]) / h;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    return h00 * f[k] + h10 * h * m[k] + h01 * f[k + 1] + h11 * h * m[k + 1];
  }

  double derivative(double t) const {
    if (t < x.front() || t > x.back()) return 0.0;
    const std::size_t k = segment(t);
    const double h = x[k + 1] - x[k];
    const double s = (t - x[k]) / h;
    const double d00 = 6 * s * s - 6 * s;
    const double d10 = 3 * s * s - 4 * s + 1;
    const double d01 = -d00;
    const double d11 = 3 * s * s - 2 * s;
    return (d00 * f[k] + d01 * f[k + 1]) / h + d10 * m[k] + d11 * m[k + 1];
  }
};

template <class F>
double solve_monotone(F&& g, double lo, double hi) {
  std::uintmax_t iters = 200;
  auto tol = [](double a, double b) { return std::abs(b - a) <= 4e-16 * std::max(1.0, std::abs(a)); };
  const auto [a, b] = boost::math::tools::toms748_solve(g, lo, hi, tol, iters);
  return 0.5 * (a + b);
}

}  // namespace detail

/// Base density defined by a tabulated cdf (strictly increasing x, nondecreasing
/// cdf values; rescaled to run from 0 to 1). The pdf is the derivative of a
/// monotone cubic interpolant, so it is flagged as derived.
inline BaseDensity tabulated_base(std::vector<double> x, std::vector<double> cdf,
                                  std::string name = "cdf_table") {
  if (x.size() != cdf.size() || x.size() < 3) {
    throw DomainError("tabulated_base: need at least 3 (x, cdf) pairs of equal length");
  }
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (!(x[k] > x[k - 1])) throw DomainError("tabulated_base: x must be strictly increasing");
    if (cdf[k] < cdf[k - 1]) throw DomainError("tabulated_base: cdf must be nondecreasing");
  }
  const double f0 = cdf.front();
  const double f1 = cdf.back();
  if (!(f1 > f0) || f0 < 0.0 || f1 > 1.0 + 1e-12) {
    throw DomainError("tabulated_base: cdf values must increase within [0, 1]");
  }
  auto table = std::make_shared<detail::CdfTable>();
  table->x = std::move(x);
  table->f.resize(cdf.size());
  for (std::size_t k = 0; k < cdf.size(); ++k) table->f[k] = (cdf[k] - f0) / (f1 - f0);

  const std::size_t n = table->x.size();
  std::vector<double> h(n - 1), d(n - 1);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = table->x[k + 1] - table->x[k];
    d[k] = (table->f[k + 1] - table->f[k]) / h[k];
  }
  table->m.assign(n, 0.0);
  table->m.front() = d.front();
  table->m.back() = d.back();
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (d[k - 1] > 0.0 && d[k] > 0.0) {
      const double w1 = 2 * h[k] + h[k - 1];
      const double w2 = h[k] + 2 * h[k - 1];
      table->m[k] = (w1 + w2) / (w1 / d[k - 1] + w2 / d[k]);
    }
  }

  BaseDensity b;
  b.name = std::move(name);
  b.cdf = [table](double t) { return table->value(t); };
  b.pdf = [table](double t) { return table->derivative(t); };
  b.quantile = [table](double u) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("tabulated quantile: u must lie in (0, 1)");
    auto it = std::lower_bound(table->f.begin(), table->f.end(), u);
    const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - table->f.begin()), 1,
                                                  table->x.size() - 1);
    return detail::solve_monotone([&](double t) { return table->value(t) - u; }, table->x[k - 1],
                                  table->x[k]);
  };
  b.support = Interval{table->x.front(), table->x.back()};
  b.pdf_derived = true;

  const Quadrature q{};
  const std::span<const double> knots(table->x);
  b.mean = integrate([&](double t) { return t * table->derivative(t); }, b.support, knots, q);
  b.variance = integrate([&](double t) { return (t - b.mean) * (t - b.mean) * table->derivative(t); },
                         b.support, knots, q);
  return b;
}

enum class FamilyKind { Location, Scale, LocationScale, Custom };

inline std::string_view to_string(FamilyKind k) {
  switch (k) {
    case FamilyKind::Location: return "location";
    case FamilyKind::Scale: return "scale";
    case FamilyKind::LocationScale: return "location-scale";
    case FamilyKind::Custom: return "custom";
  }
  return "custom";
}

/// Density p(x; theta) on R indexed by theta in R^p, with cdf, quantile and
/// the parameter derivatives of the cdf. Immutable once built.
///
/// Evaluators do not re-validate theta; operations taking a family call
/// validate() once at entry.
class ParametricFamily1D {
 public:
  using Pointwise = std::function<double(double, const ParameterPoint&)>;
  using Dtheta = std::function<double(double, const ParameterPoint&, std::size_t)>;
  using SupportFn = std::function<Interval(const ParameterPoint&)>;
  using ValidateFn = std::function<void(const ParameterPoint&)>;

  struct Definition {
    std::string name;
    FamilyKind kind = FamilyKind::Custom;
    std::optional<BaseDensity> base;
    std::size_t param_dim = 1;
    Pointwise pdf;       // optional: derived from cdf by central differences
    Pointwise cdf;       // required
    Pointwise quantile;  // optional: root-finding on cdf
    Dtheta dtheta_cdf;   // optional: central differences in theta
    SupportFn support;   // optional: whole real line
    ValidateFn validate; // optional: dimension check only
  };

  explicit ParametricFamily1D(Definition d) : def_(std::make_shared<Definition>(std::move(d))) {
    auto& def = *def_;
    if (!def.cdf) throw DomainError("ParametricFamily1D: cdf is required");
    if (def.param_dim == 0) throw DomainError("ParametricFamily1D: param_dim must be >= 1");
    if (!def.support) {
      def.support = [](const ParameterPoint&) {
        return Interval{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      };
    }
    if (!def.pdf) {
      notes_.push_back("pdf derived from cdf by central differences");
      def.pdf = [cdf = def.cdf](double x, const ParameterPoint& th) {
        return central_diff([&](double t) { return cdf(t, th); }, x);
      };
    }
    if (def.base && def.base->pdf_derived) {
      notes_.push_back("base pdf derived by differentiating a tabulated cdf");
    }
    if (!def.quantile) {
      def.quantile = [cdf = def.cdf, support = def.support](double u, const ParameterPoint& th) {
        if (!(u > 0.0 && u < 1.0)) throw DomainError("quantile: u must lie in (0, 1)");
        const Interval s = support(th);
        double lo = std::isfinite(s.lo) ? s.lo : -1.0;
        double hi = std::isfinite(s.hi) ? s.hi : 1.0;
        while (!std::isfinite(s.lo) && cdf(lo, th) > u) lo *= 2.0;
        while (!std::isfinite(s.hi) && cdf(hi, th) < u) hi *= 2.0;
        return detail::solve_monotone([&](double x) { return cdf(x, th) - u; }, lo, hi);
      };
    }
    analytic_dtheta_ = static_cast<bool>(def.dtheta_cdf);
    if (!def.dtheta_cdf) {
      notes_.push_back("parameter derivatives of the cdf by central differences");
      def.dtheta_cdf = [cdf = def.cdf](double x, const ParameterPoint& th, std::size_t i) {
        return central_diff([&](double t) { return cdf(x, th.with(i, t)); }, th[i]);
      };
    }
  }

  const std::string& name() const noexcept { return def_->name; }
  FamilyKind kind() const noexcept { return def_->kind; }
  const std::optional<BaseDensity>& base() const noexcept { return def_->base; }
  std::size_t param_dim() const noexcept { return def_->param_dim; }
  bool has_analytic_dtheta() const noexcept { return analytic_dtheta_; }
  /// Accuracy caveats attached at construction (derived pdf, numerical derivatives).
  const std::vector<std::string>& notes() const noexcept { return notes_; }

  void validate(const ParameterPoint& th) const {
    if (th.size() != def_->param_dim) {
      std::ostringstream os;
      os << name() << ": expected " << def_->param_dim << " parameters, got " << th.size();
      throw DomainError(os.str());
    }
    for (double v : th.values()) {
      if (!std::isfinite(v)) throw DomainError(name() + ": parameters must be finite");
    }
    if (def_->validate) def_->validate(th);
  }

  double pdf(double x, const ParameterPoint& th) const { return def_->pdf(x, th); }
  double cdf(double x, const ParameterPoint& th) const { return def_->cdf(x, th); }
  double quantile(double u, const ParameterPoint& th) const { return def_->quantile(u, th); }

  /// dF(x; theta) / d theta_i.
  double dtheta_cdf(double x, const ParameterPoint& th, std::size_t i) const {
    if (i >= def_->param_dim) {
      std::ostringstream os;
      os << name() << ": parameter index " << i << " out of range (p=" << def_->param_dim << ")";
      throw DomainError(os.str());
    }
    return def_->dtheta_cdf(x, th, i);
  }

  Interval support(const ParameterPoint& th) const { return def_->support(th); }

  double median(const ParameterPoint& th) const { return quantile(0.5, th); }

  /// Finite window carrying all but kTailMass of each unbounded tail.
  Interval window(const ParameterPoint& th) const {
    const Interval s = support(th);
    return Interval{std::isfinite(s.lo) ? s.lo : quantile(kTailMass, th),
                    std::isfinite(s.hi) ? s.hi : quantile(1.0 - kTailMass, th)};
  }

 private:
  std::shared_ptr<Definition> def_;
  std::vector<std::string> notes_;
  bool analytic_dtheta_ = false;
};

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << what << " must be positive (got " << v << ")";
    throw DomainError(os.str());
  }
}

inline Interval affine_image(const Interval& s, double shift, double scale) {
  return Interval{shift + scale * s.lo, shift + scale * s.hi};
}

}  // namespace detail

/// p(x; theta) = f(x - theta).
inline ParametricFamily1D make_location(const BaseDensity& base) {
  ParametricFamily1D::Definition d;
  d.name = "location(" + base.name + ")";
  d.kind = FamilyKind::Location;
  d.base = base;
  d.param_dim = 1;
  d.pdf = [f = base.pdf](double x, const ParameterPoint& th) { return f(x - th[0]); };
  d.cdf = [F = base.cdf](double x, const ParameterPoint& th) { return F(x - th[0]); };
  d.quantile = [Q = base.quantile](double u, const ParameterPoint& th) { return th[0] + Q(u); };
  d.dtheta_cdf = [f = base.pdf](double x, const ParameterPoint& th, std::size_t) { return -f(x - th[0]); };
  d.support = [s = base.support](const ParameterPoint& th) { return detail::affine_image(s, th[0], 1.0); };
  return ParametricFamily1D(std::move(d));
}

/// p(x; theta) = f(x / theta) / theta, theta > 0.
inline ParametricFamily1D make_scale(const BaseDensity& base) {
  ParametricFamily1D::Definition d;
  d.name = "scale(" + base.name + ")";
  d.kind = FamilyKind::Scale;
  d.base = base;
  d.param_dim = 1;
  d.pdf = [f = base.pdf](double x, const ParameterPoint& th) { return f(x / th[0]) / th[0]; };
  d.cdf = [F = base.cdf](double x, const ParameterPoint& th) { return F(x / th[0]); };
  d.quantile = [Q = base.quantile](double u, const ParameterPoint& th) { return th[0] * Q(u); };
  d.dtheta_cdf = [f = base.pdf](double x, const ParameterPoint& th, std::size_t) {
    const double z = x / th[0];
    return -z * f(z) / th[0];
  };
  d.support = [s = base.support](const ParameterPoint& th) { return detail::affine_image(s, 0.0, th[0]); };
  d.validate = [](const ParameterPoint& th) { detail::require_positive(th[0], "scale parameter"); };
  return ParametricFamily1D(std::move(d));
}

/// p(x; mu, sigma) = f((x - mu) / sigma) / sigma for a base with mean 0 and
/// variance 1.
inline ParametricFamily1D make_location_scale(const BaseDensity& base) {
  if (std::abs(base.mean) > 1e-6 || std::abs(base.variance - 1.0) > 1e-6) {
    std::ostringstream os;
    os << "make_location_scale: base '" << base.name << "' must have mean 0 and variance 1 (mean="
       << base.mean << ", variance=" << base.variance << ")";
    throw DomainError(os.str());
  }
  ParametricFamily1D::Definition d;
  d.name = "location-scale(" + base.name + ")";
  d.kind = FamilyKind::LocationScale;
  d.base = base;
  d.param_dim = 2;
  d.pdf = [f = base.pdf](double x, const ParameterPoint& th) { return f((x - th[0]) / th[1]) / th[1]; };
  d.cdf = [F = base.cdf](double x, const ParameterPoint& th) { return F((x - th[0]) / th[1]); };
  d.quantile = [Q = base.quantile](double u, const ParameterPoint& th) { return th[0] + th[1] * Q(u); };
  d.dtheta_cdf = [f = base.pdf](double x, const ParameterPoint& th, std::size_t i) {
    const double z = (x - th[0]) / th[1];
    const double p = f(z) / th[1];
    return i == 0 ? -p : -z * p;
  };
  d.support = [s = base.support](const ParameterPoint& th) { return detail::affine_image(s, th[0], th[1]); };
  d.validate = [](const ParameterPoint& th) { detail::require_positive(th[1], "sigma"); };
  return ParametricFamily1D(std::move(d));
}

namespace detail {

inline double poly_eval(std::span<const double> c, double t) {
  double r = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * t + *it;
  return r;
}

inline double poly_deriv(std::span<const double> c, double t) {
  double r = 0.0;
  for (std::size_t k = c.size(); k-- > 1;) r = r * t + static_cast<double>(k) * c[k];
  return r;
}

}  // namespace detail

/// One-parameter curve t -> (mu(t), sigma(t)) through a location-scale family,
/// with mu and sigma given as polynomial coefficients (constant term first).
inline ParametricFamily1D make_curve(const BaseDensity& base, std::vector<double> mu_coeffs,
                                     std::vector<double> sigma_coeffs) {
  if (mu_coeffs.empty() || sigma_coeffs.empty()) {
    throw DomainError("make_curve: coefficient lists must be non-empty");
  }
  const ParametricFamily1D ls = make_location_scale(base);
  auto mu = std::make_shared<const std::vector<double>>(std::move(mu_coeffs));
  auto sg = std::make_shared<const std::vector<double>>(std::move(sigma_coeffs));
  auto at = [mu, sg](const ParameterPoint& th) {
    return ParameterPoint{detail::poly_eval(*mu, th[0]), detail::poly_eval(*sg, th[0])};
  };

  ParametricFamily1D::Definition d;
  d.name = "curve(" + base.name + ")";
  d.kind = FamilyKind::Custom;
  d.base = base;
  d.param_dim = 1;
  d.pdf = [ls, at](double x, const ParameterPoint& th) { return ls.pdf(x, at(th)); };
  d.cdf = [ls, at](double x, const ParameterPoint& th) { return ls.cdf(x, at(th)); };
  d.quantile = [ls, at](double u, const ParameterPoint& th) { return ls.quantile(u, at(th)); };
  d.dtheta_cdf = [ls, at, mu, sg](double x, const ParameterPoint& th, std::size_t) {
    const ParameterPoint p = at(th);
    return detail::poly_deriv(*mu, th[0]) * ls.dtheta_cdf(x, p, 0) +
           detail::poly_deriv(*sg, th[0]) * ls.dtheta_cdf(x, p, 1);
  };
  d.support = [ls, at](const ParameterPoint& th) { return ls.support(at(th)); };
  d.validate = [at](const ParameterPoint& th) { detail::require_positive(at(th)[1], "curve sigma(t)"); };
  return ParametricFamily1D(std::move(d));
}

/// One-parameter family re-indexed by eta with theta = h(eta); `dh` is h'.
inline ParametricFamily1D reparametrize(const ParametricFamily1D& family, std::function<double(double)> h,
                                        std::function<double(double)> dh) {
  if (family.param_dim() != 1) throw DomainError("reparametrize: one-parameter family required");
  auto to_theta = [h](const ParameterPoint& eta) { return ParameterPoint{h(eta[0])}; };
  ParametricFamily1D::Definition d;
  d.name = "reparametrized(" + family.name() + ")";
  d.kind = FamilyKind::Custom;
  d.base = family.base();
  d.param_dim = 1;
  d.pdf = [family, to_theta](double x, const ParameterPoint& e) { return family.pdf(x, to_theta(e)); };
  d.cdf = [family, to_theta](double x, const ParameterPoint& e) { return family.cdf(x, to_theta(e)); };
  d.quantile = [family, to_theta](double u, const ParameterPoint& e) { return family.quantile(u, to_theta(e)); };
  d.dtheta_cdf = [family, to_theta, dh](double x, const ParameterPoint& e, std::size_t) {
    return dh(e[0]) * family.dtheta_cdf(x, to_theta(e), 0);
  };
  d.support = [family, to_theta](const ParameterPoint& e) { return family.support(to_theta(e)); };
  d.validate = [family, to_theta](const ParameterPoint& e) { family.validate(to_theta(e)); };
  return ParametricFamily1D(std::move(d));
}

/// E_theta[g(X)] over the truncated window, split at the median (where the
/// built-in Laplace density has its cusp).
template <class G>
double expect(const ParametricFamily1D& family, const ParameterPoint& th, G&& g, const Quadrature& q = {}) {
  const Interval w = family.window(th);
  const double m = family.median(th);
  return integrate([&](double x) { return g(x) * family.pdf(x, th); }, w, {m}, q);
}

/// Inverse-cdf draws into `out` from the given stream.
inline void sample_into(const ParametricFamily1D& family, const ParameterPoint& th, TrialStream& stream,
                        std::span<double> out) {
  for (double& x : out) x = family.quantile(stream.uniform(), th);
}

/// n inverse-cdf draws; identical for identical (family, theta, n, seed).
inline std::vector<double> sample(const ParametricFamily1D& family, const ParameterPoint& th, std::size_t n,
                                  std::uint64_t seed) {
  if (n == 0) throw DomainError("sample: n must be >= 1");
  family.validate(th);
  std::vector<double> out(n);
  TrialStream stream(seed, 0);
  sample_into(family, th, stream, out);
  return out;
}

}  // namespace wcr
