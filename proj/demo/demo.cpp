// Small tour: scores, information matrix and the efficiency of the sample
// mean and sample standard deviation in the Gaussian location-scale family.

#include <iomanip>
#include <iostream>

#include "wcr/wcr.hpp"

int main() {
  const auto family = wcr::make_location_scale(wcr::gaussian_base());
  const wcr::ParameterPoint theta{0.5, 2.0};

  const auto phi_sigma = wcr::solve_score_1d(family, theta, 1);
  std::cout << std::setprecision(6) << "score for sigma at x = 3: " << phi_sigma.phi(3.0)
            << " (closed form " << ((3.0 - 0.5) * (3.0 - 0.5) / 4.0 - 1.0) << ")\n";

  const auto info = wcr::info_matrix(family, theta, 10);
  std::cout << "G_W for n = 10:\n" << info.g.matrix() << "\n";

  wcr::McConfig cfg;
  cfg.trials = 20000;
  cfg.seed = 7;
  const auto r = wcr::efficiency_gap(family, theta, wcr::wasserstein_statistic(), 10, cfg);
  std::cout << "Var^W:\n" << r.var_w.var.matrix() << "\nbound:\n" << r.bound.matrix() << "\ngap min eigenvalue "
            << r.gap_min_eig << " +- " << r.gap_sigma << (r.attained ? " (attained)" : " (not attained)") << "\n";

  const auto w2 = wcr::w2_distance_1d(family, theta, wcr::ParameterPoint{0.51, 2.0});
  std::cout << "W2 to a shifted member: " << w2.distance << "\n";
  return 0;
}
