#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wcr/efficiency.hpp"

using namespace wcr;

namespace {

McConfig small_mc(std::uint64_t seed, std::size_t trials = 4000) {
  McConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  return cfg;
}

}  // namespace

TEST(ScalarEfficiency, MeanUnderLocationIsAttained) {
  for (const auto& base : {gaussian_base(), laplace_base(), logistic_base()}) {
    const auto f = make_location(base);
    const auto r = efficiency_quadrature(f, ParameterPoint{0.7}, power_statistic(1));
    EXPECT_NEAR(r.var_w, 1.0, 1e-12);
    EXPECT_NEAR(r.dexp, 1.0, 1e-12);
    EXPECT_NEAR(r.g_w, 1.0, 1e-9);
    EXPECT_TRUE(r.attained) << base.name;
    EXPECT_LT(r.affine.residual, 1e-12);
    EXPECT_NEAR(r.affine.u, 1.0, 1e-9);
    EXPECT_NEAR(r.affine.v, 0.7, 1e-9);  // x = (x - theta) + theta
  }
}

TEST(ScalarEfficiency, MeanOfSquaresUnderScaleIsAttained) {
  const auto f = make_scale(laplace_base());
  const double th = 1.3;
  const auto r = efficiency_quadrature(f, ParameterPoint{th}, power_statistic(2));
  EXPECT_NEAR(r.var_w, 4 * th * th, 1e-9);
  EXPECT_NEAR(r.dexp, 2 * th, 1e-9);
  EXPECT_NEAR(r.dexp_fd, 2 * th, 1e-7);
  EXPECT_TRUE(r.attained);
  EXPECT_NEAR(r.affine.u, 2 * th, 1e-9);
  EXPECT_NEAR(r.affine.v, th * th, 1e-9);  // x^2 = 2 theta Phi + theta^2
}

TEST(ScalarEfficiency, NonAffineStatisticsHaveGap) {
  const auto sc = make_scale(gaussian_base());
  const auto r = efficiency_quadrature(sc, ParameterPoint{2.0}, power_statistic(1));
  EXPECT_NEAR(r.var_w, 1.0, 1e-12);
  EXPECT_NEAR(r.dexp, 0.0, 1e-12);
  EXPECT_FALSE(r.attained);
  EXPECT_NEAR(r.affine.residual, 1.0, 1e-9);

  const auto loc = make_location(gaussian_base());
  const auto q = efficiency_quadrature(loc, ParameterPoint{0.5}, power_statistic(2));
  EXPECT_NEAR(q.var_w, 4 * (0.25 + 1.0), 1e-9);
  EXPECT_NEAR(q.bound, 1.0, 1e-9);
  EXPECT_NEAR(q.gap, 4.0, 1e-8);
  EXPECT_FALSE(q.attained);
}

TEST(ScalarEfficiency, ConstantStatistic) {
  const auto r = efficiency_quadrature(make_location(gaussian_base()), ParameterPoint{0.0}, power_statistic(0));
  EXPECT_EQ(r.var_w, 0.0);
  EXPECT_TRUE(r.affine.constant_statistic);
  EXPECT_TRUE(r.attained);
}

TEST(ScalarEfficiency, RequiresOneParameter) {
  EXPECT_THROW(efficiency_quadrature(make_location_scale(gaussian_base()), ParameterPoint{0.0, 1.0},
                                     power_statistic(1)),
               DomainError);
}

TEST(EfficiencyGap, SampleMeanLocationExact) {
  const auto r = efficiency_gap(make_location(logistic_base()), ParameterPoint{1.0}, sample_mean_statistic(), 8,
                                small_mc(1));
  EXPECT_NEAR(r.var_w.var(0, 0), 1.0 / 8, 1e-15);
  EXPECT_NEAR(r.dexp(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(r.dexp_fd(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(r.info.g(0, 0), 8.0, 1e-8);
  EXPECT_TRUE(r.attained);
  ASSERT_TRUE(r.affine_fit.has_value());
  EXPECT_LT(r.affine_fit->residual, 1e-12);
  EXPECT_NEAR(r.mean_value[0], 1.0, 0.1);
}

TEST(EfficiencyGap, MeanOfSquaresScaleAttained) {
  const auto r = efficiency_gap(make_scale(gaussian_base()), ParameterPoint{0.8}, mean_of_squares_statistic(), 6,
                                small_mc(2));
  EXPECT_TRUE(r.attained) << r.gap(0, 0) << " +- " << r.gap_sigma;
  ASSERT_TRUE(r.affine_fit.has_value());
  EXPECT_LT(r.affine_fit->residual, 1e-12);
}

TEST(EfficiencyGap, SampleMeanUnderScaleIsNotAttained) {
  const auto r = efficiency_gap(make_scale(gaussian_base()), ParameterPoint{1.5}, sample_mean_statistic(), 10,
                                small_mc(3));
  EXPECT_GT(r.gap_min_eig, 10.0 * r.gap_sigma);
  EXPECT_NEAR(r.gap(0, 0), 0.1, 0.01);
  EXPECT_FALSE(r.attained);
  EXPECT_GT(r.affine_fit->residual, 0.5);
}

TEST(EfficiencyGap, WassersteinEstimatorGapStructure) {
  const auto r = efficiency_gap(make_location_scale(gaussian_base()), ParameterPoint{0.0, 1.0},
                                wasserstein_statistic(), 5, small_mc(4, 20000));
  EXPECT_NEAR(r.var_w.var(0, 0), 0.2, 1e-15);
  EXPECT_NEAR(r.dexp(1, 1), 0.8407487, 4.0 * r.dexp_se(1, 1));
  EXPECT_GE(r.gap_min_eig, -3.0 * r.gap_sigma);
  EXPECT_NEAR(r.gap(1, 1), (1.0 - 0.8407487 * 0.8407487) / 5.0, 0.005);
  EXPECT_FALSE(r.affine_fit.has_value());
}

TEST(EfficiencyGap, DegenerateStatisticRaises) {
  ParametricFamily1D::Definition d;
  d.name = "atom";
  d.param_dim = 1;
  d.cdf = [](double x, const ParameterPoint& th) { return x < th[0] ? 0.0 : 1.0; };
  d.pdf = [](double, const ParameterPoint&) { return 1.0; };
  d.quantile = [](double, const ParameterPoint& th) { return th[0]; };
  d.dtheta_cdf = [](double, const ParameterPoint&, std::size_t) { return 0.0; };
  EXPECT_THROW(efficiency_gap(ParametricFamily1D(d), ParameterPoint{0.0}, sample_std_statistic(), 4, small_mc(5)),
               Error);
}

TEST(EfficiencyGap, ReparametrizationKeepsVerdict) {
  const auto sc = make_scale(gaussian_base());
  const auto re = reparametrize(
      sc, [](double e) { return std::exp(e); }, [](double e) { return std::exp(e); });
  for (const auto& stat : {mean_of_squares_statistic(), sample_mean_statistic()}) {
    const auto a = efficiency_gap(sc, ParameterPoint{std::exp(0.2)}, stat, 5, small_mc(6));
    const auto b = efficiency_gap(re, ParameterPoint{0.2}, stat, 5, small_mc(6));
    EXPECT_EQ(a.attained, b.attained) << stat.name();
    EXPECT_NEAR(a.var_w.var(0, 0), b.var_w.var(0, 0), 1e-14);
    EXPECT_NEAR(a.bound(0, 0), b.bound(0, 0), 1e-6 * (1.0 + a.bound(0, 0)));
  }
}

TEST(WcrBound, MatchesReport) {
  const auto f = make_location(gaussian_base());
  const auto b = wcr_bound(f, ParameterPoint{0.0}, sample_mean_statistic(), 4, small_mc(7, 500));
  EXPECT_NEAR(b(0, 0), 0.25, 1e-8);
}

TEST(Geodesic, LocationAndScaleAreGeodesics) {
  const auto loc = check_e_geodesic(make_location(laplace_base()), {-1.0, 0.0, 2.0});
  EXPECT_TRUE(loc.is_geodesic_up_to_reparam);
  EXPECT_NEAR(loc.slope(0, 2), 1.0, 1e-9);
  const auto sc = check_e_geodesic(make_scale(gaussian_base()), {1.0, 2.0, 4.0});
  EXPECT_TRUE(sc.is_geodesic_up_to_reparam);
  // Phi(x; t2) = (t1 / t2) Phi(x; t1) + const.
  EXPECT_NEAR(sc.slope(0, 1), 0.5, 1e-9);
  EXPECT_NEAR(sc.slope(0, 2), 0.25, 1e-9);
}

TEST(Geodesic, GaussianCurveIsNot) {
  const auto c = make_curve(gaussian_base(), {0.0, 1.0}, {1.0, 0.0, 1.0});
  const auto r = check_e_geodesic(c, {0.0, 0.5, 1.0});
  EXPECT_FALSE(r.is_geodesic_up_to_reparam);
  EXPECT_GT(r.pairwise_affinity.maxCoeff(), 0.1);
  EXPECT_THROW(check_e_geodesic(c, {0.5}), DomainError);
  EXPECT_THROW(check_e_geodesic(make_location_scale(gaussian_base()), {0.0, 1.0}), DomainError);
}
