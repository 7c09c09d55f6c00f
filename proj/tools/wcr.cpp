// Command-line front end: wcr <subcommand> [options]

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "wcr/io/family_json.hpp"
#include "wcr/wcr.hpp"

namespace {

using nlohmann::json;

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw wcr::DomainError("cannot parse number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw wcr::DomainError("empty list '" + text + "'");
  return out;
}

std::vector<std::size_t> parse_counts(const std::string& text) {
  std::vector<std::size_t> out;
  for (double v : parse_list(text)) {
    if (!(v >= 1.0) || v != std::floor(v)) throw wcr::DomainError("expected positive integers in '" + text + "'");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

json to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json to_json(const wcr::SymMatrix& m) { return to_json(m.matrix()); }

json to_json(const wcr::McEstimate& e) {
  return {{"mean", e.mean}, {"std_error", e.std_error}, {"ci95", {e.ci_lo(), e.ci_hi()}}};
}

json to_json(const std::vector<wcr::Band>& bands) {
  json arr = json::array();
  for (const auto& b : bands) arr.push_back({{"band", b.name}, {"passed", b.passed}, {"detail", b.detail}});
  return arr;
}

bool all_passed(const std::vector<wcr::Band>& bands) {
  for (const auto& b : bands)
    if (!b.passed) return false;
  return true;
}

std::vector<double> read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw wcr::DomainError("cannot open data file '" + path + "'");
  std::vector<double> data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto cut = line.find(',');
    std::string field = line.substr(0, cut);
    if (field.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      data.push_back(std::stod(field, &used));
    } catch (const std::exception&) {
      if (line_no == 1) continue;  // header
      throw wcr::DomainError("data file line " + std::to_string(line_no) + ": cannot parse '" + field + "'");
    }
  }
  return data;
}

std::ostream& open_out(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw wcr::DomainError("cannot write '" + path + "'");
  return file;
}

wcr::McConfig mc_config(std::size_t trials, std::uint64_t seed, unsigned workers) {
  wcr::McConfig cfg;
  cfg.trials = trials;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wasserstein scores, information matrices and Cramer-Rao efficiency for 1-D families", "wcr"};
  app.require_subcommand(1);
  unsigned workers = 0;
  app.add_option("--workers", workers, "Monte Carlo worker threads (0: all cores)");

  // score
  std::string family_text;
  std::string theta_text;
  std::size_t param = 0;
  std::size_t grid = 512;
  std::string method = "solver";
  std::string out_path;
  auto* score_cmd = app.add_subcommand("score", "Wasserstein score on a grid, CSV (x, phi, dphi, residual)");
  score_cmd->add_option("--family", family_text, "Family JSON (inline or file)")->required();
  score_cmd->add_option("--theta", theta_text, "Comma-separated parameters")->required();
  score_cmd->add_option("--param", param, "Parameter index");
  score_cmd->add_option("--grid", grid, "Number of grid points");
  score_cmd->add_option("--method", method, "solver | closed")->check(CLI::IsMember({"solver", "closed"}));
  score_cmd->add_option("--out", out_path, "Output CSV (default stdout)");

  // winfo
  std::size_t nobs = 1;
  auto* winfo_cmd = app.add_subcommand("winfo", "Wasserstein information matrix, JSON");
  winfo_cmd->add_option("--family", family_text)->required();
  winfo_cmd->add_option("--theta", theta_text)->required();
  winfo_cmd->add_option("--nobs", nobs, "Number of i.i.d. observations");

  // w2
  std::string theta1_text;
  std::string theta2_text;
  bool w2_json = false;
  auto* w2_cmd = app.add_subcommand("w2", "W2 distance between two members of a family");
  w2_cmd->add_option("--family", family_text)->required();
  w2_cmd->add_option("--theta1", theta1_text)->required();
  w2_cmd->add_option("--theta2", theta2_text)->required();
  w2_cmd->add_flag("--json", w2_json, "Print the full result (squared, unhalved cost, tail bound)");

  // estimate
  std::string data_path;
  std::string estimator = "wasserstein";
  auto* est_cmd = app.add_subcommand("estimate", "Estimate from a data CSV, JSON");
  est_cmd->add_option("--data", data_path, "CSV file; first column is used")->required();
  est_cmd->add_option("--estimator", estimator)
      ->check(CLI::IsMember({"wasserstein", "mle-laplace", "median", "mean-sq"}));

  // efficiency
  std::size_t n = 10;
  std::size_t trials = 20000;
  std::uint64_t seed = 1;
  auto* eff_cmd = app.add_subcommand("efficiency", "Monte Carlo WCR efficiency report, JSON");
  eff_cmd->add_option("--family", family_text)->required();
  eff_cmd->add_option("--estimator", estimator, "wasserstein | mean | std | median | mean-sq | mle-laplace");
  eff_cmd->add_option("--theta", theta_text)->required();
  eff_cmd->add_option("--n", n, "Sample size");
  eff_cmd->add_option("--trials", trials);
  eff_cmd->add_option("--seed", seed);

  // geodesic
  std::string thetas_text;
  auto* geo_cmd = app.add_subcommand("geodesic", "e-geodesic check for a one-parameter family, JSON");
  geo_cmd->add_option("--family", family_text)->required();
  geo_cmd->add_option("--thetas", thetas_text, "Comma-separated parameter values")->required();

  // asymptotic sweep
  std::string base_name = "gaussian";
  std::string ns_text = "5,10,20,50,100";
  std::string t2_theta = "0,1";
  auto* t2_cmd = app.add_subcommand("theorem2", "Asymptotic efficiency sweep of the Wasserstein estimator");
  t2_cmd->alias("sweep");
  t2_cmd->add_option("--base", base_name)->check(CLI::IsMember({"gaussian", "laplace", "logistic"}));
  t2_cmd->add_option("--theta", t2_theta, "mu,sigma");
  t2_cmd->add_option("--ns", ns_text);
  t2_cmd->add_option("--trials", trials);
  t2_cmd->add_option("--seed", seed);
  t2_cmd->add_option("--out", out_path, "Output CSV");

  // laplace-robustness
  double sigma = 1.0;
  std::size_t rob_n = 1001;
  std::string eps_text = "0.05,0.1,0.2";
  std::size_t rob_trials = 200000;
  bool no_exact = false;
  auto* rob_cmd = app.add_subcommand("laplace-robustness", "Noise robustness of mean vs median on Laplace data");
  rob_cmd->add_option("--sigma", sigma);
  rob_cmd->add_option("--n", rob_n);
  rob_cmd->add_option("--eps", eps_text);
  rob_cmd->add_option("--trials", rob_trials);
  rob_cmd->add_option("--seed", seed);
  rob_cmd->add_option("--out", out_path, "Output CSV");
  rob_cmd->add_flag("--no-exact", no_exact, "Skip the finite-n order-statistic quadrature column");

  CLI11_PARSE(app, argc, argv);

  try {
    std::cout << std::setprecision(17);
    if (*score_cmd) {
      const auto family = wcr::family_from_descriptor(family_text);
      const wcr::ParameterPoint theta(parse_list(theta_text));
      family.validate(theta);
      const wcr::WassersteinScore s = method == "solver" ? wcr::solve_score_1d(family, theta, param)
                                                         : wcr::score(family, theta, param);
      std::ofstream file;
      std::ostream& os = open_out(out_path, file);
      os << std::setprecision(17) << "x,phi,dphi,residual\n";
      for (double x : wcr::score_grid(family, theta, grid)) {
        os << x << ',' << s.phi(x) << ',' << s.dphi(x) << ',' << wcr::continuity_residual(family, theta, s, x)
           << '\n';
      }
      return 0;
    }
    if (*winfo_cmd) {
      const auto family = wcr::family_from_descriptor(family_text);
      const wcr::ParameterPoint theta(parse_list(theta_text));
      const auto info = wcr::info_matrix(family, theta, nobs);
      json j{{"family", family.name()},
             {"theta", std::vector<double>(theta.values().begin(), theta.values().end())},
             {"n_obs", nobs},
             {"G_W", to_json(info.g)},
             {"eigenvalues", info.g.eigenvalues()},
             {"notes", family.notes()}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*w2_cmd) {
      const auto family = wcr::family_from_descriptor(family_text);
      const auto r = wcr::w2_distance_1d(family, wcr::ParameterPoint(parse_list(theta1_text)),
                                         wcr::ParameterPoint(parse_list(theta2_text)));
      if (!r.warning.empty()) std::cerr << "warning: " << r.warning << '\n';
      if (w2_json) {
        json j{{"w2", r.distance},
               {"w2_squared", r.squared},
               {"transport_cost", r.transport_cost},
               {"tail_bound", r.tail_bound},
               {"warning", r.warning}};
        std::cout << j.dump(2) << '\n';
      } else {
        std::cout << r.distance << '\n';
      }
      return 0;
    }
    if (*est_cmd) {
      const std::vector<double> data = read_data_csv(data_path);
      json j{{"estimator", estimator}, {"n", data.size()}};
      if (estimator == "wasserstein") {
        const auto e = wcr::wasserstein_estimator(data);
        j["estimate"] = {{"mu", e.mu}, {"sigma", e.sigma}};
        j["degenerate"] = e.degenerate;
        if (e.degenerate) {
          j["gradient_norms"] = {1.0 / std::sqrt(static_cast<double>(data.size())), nullptr};
        } else {
          const Eigen::MatrixXd g = wcr::grad_wasserstein_estimator(data);
          j["gradient_norms"] = {g.row(0).norm(), g.row(1).norm()};
        }
      } else if (estimator == "median" || estimator == "mle-laplace") {
        const auto m = wcr::sample_median(data);
        double norm = 0.0;
        for (double g : m.gradient) norm += g * g;
        j["estimate"] = estimator == "median" ? json{{"median", m.value}} : json{{"mu", m.value}};
        j["gradient_norms"] = {std::sqrt(norm)};
        j["tie"] = m.tie;
      } else {
        const auto m = wcr::mean_of_squares(data);
        double norm = 0.0;
        for (double g : m.gradient) norm += g * g;
        j["estimate"] = {{"mean_of_squares", m.value}};
        j["gradient_norms"] = {std::sqrt(norm)};
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*eff_cmd) {
      const auto family = wcr::family_from_descriptor(family_text);
      const wcr::ParameterPoint theta(parse_list(theta_text));
      const auto r = wcr::efficiency_gap(family, theta, wcr::statistic_by_name(estimator), n,
                                         mc_config(trials, seed, workers));
      json j{{"family", family.name()},
             {"statistic", r.statistic},
             {"n", r.n},
             {"trials", r.trials},
             {"theta", std::vector<double>(theta.values().begin(), theta.values().end())},
             {"var_w", to_json(r.var_w.var)},
             {"var_w_std_error", to_json(r.var_w.std_error)},
             {"G_W", to_json(r.info.g)},
             {"dexp", to_json(r.dexp)},
             {"dexp_std_error", to_json(r.dexp_se)},
             {"dexp_fd", to_json(r.dexp_fd)},
             {"bound", to_json(r.bound)},
             {"gap", to_json(r.gap)},
             {"gap_min_eig", r.gap_min_eig},
             {"gap_sigma", r.gap_sigma},
             {"attained", r.attained}};
      if (r.affine_fit) {
        j["affine_fit"] = {{"u", r.affine_fit->u},
                           {"v", r.affine_fit->v},
                           {"residual", r.affine_fit->residual},
                           {"constant_statistic", r.affine_fit->constant_statistic}};
      }
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*geo_cmd) {
      const auto family = wcr::family_from_descriptor(family_text);
      const auto r = wcr::check_e_geodesic(family, parse_list(thetas_text));
      json j{{"family", family.name()},
             {"thetas", parse_list(thetas_text)},
             {"is_geodesic_up_to_reparam", r.is_geodesic_up_to_reparam},
             {"pairwise_affinity", to_json(r.pairwise_affinity)},
             {"slope", to_json(r.slope)}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (*t2_cmd) {
      const wcr::BaseDensity base = wcr::base_from_json(json(base_name));
      const auto rows = wcr::asymptotic_efficiency_sweep(base, wcr::ParameterPoint(parse_list(t2_theta)),
                                                         parse_counts(ns_text), mc_config(trials, seed, workers));
      if (!out_path.empty()) {
        std::ofstream file;
        std::ostream& os = open_out(out_path, file);
        os << std::setprecision(12)
           << "n,var_w_mumu,var_w_sigsig,var_w_musig,g_w_mumu,g_w_sigsig,c_n,c_n_se,c_n_oracle,"
              "scaled_gap_mumu,scaled_gap_sigsig,scaled_gap_musig,scaled_gap_sigma\n";
        for (const auto& r : rows) {
          os << r.n << ',' << r.var_w(0, 0) << ',' << r.var_w(1, 1) << ',' << r.var_w(0, 1) << ',' << r.g_w(0, 0)
             << ',' << r.g_w(1, 1) << ',' << r.c_n << ',' << r.c_n_se << ','
             << (r.c_n_oracle ? std::to_string(*r.c_n_oracle) : std::string("")) << ',' << r.scaled_gap(0, 0) << ','
             << r.scaled_gap(1, 1) << ',' << r.scaled_gap(0, 1) << ',' << r.scaled_gap_sigma << '\n';
        }
      }
      const auto bands = wcr::sweep_bands(rows);
      json table = json::array();
      for (const auto& r : rows) {
        table.push_back({{"n", r.n},
                         {"c_n", r.c_n},
                         {"c_n_se", r.c_n_se},
                         {"c_n_oracle", r.c_n_oracle ? json(*r.c_n_oracle) : json(nullptr)},
                         {"scaled_gap", to_json(r.scaled_gap)}});
      }
      json j{{"base", base_name}, {"trials", trials}, {"seed", seed}, {"rows", table}, {"bands", to_json(bands)},
             {"passed", all_passed(bands)}};
      std::cout << j.dump(2) << '\n';
      return all_passed(bands) ? 0 : 1;
    }
    if (*rob_cmd) {
      const auto r = wcr::laplace_robustness(sigma, rob_n, parse_list(eps_text), mc_config(rob_trials, seed, workers),
                                             !no_exact);
      if (!out_path.empty()) {
        std::ofstream file;
        std::ostream& os = open_out(out_path, file);
        os << std::setprecision(12)
           << "n,eps,var_w_clean,var_w_noisy,var_ml_clean,var_ml_noisy,slope_w,slope_w_se,predicted_slope_w,"
              "slope_ml,slope_ml_se,predicted_slope_ml,exact_slope_ml_finite_n,predicted_var_ml_noisy\n";
        for (const auto& c : r.cells) {
          os << r.n << ',' << c.eps << ',' << r.var_w_clean.mean << ',' << c.var_w_noisy.mean << ','
             << r.var_ml_clean.mean << ',' << c.var_ml_noisy.mean << ',' << c.slope_w << ',' << c.slope_w_se << ','
             << c.predicted_slope_w << ',' << c.slope_ml << ',' << c.slope_ml_se << ',' << c.predicted_slope_ml
             << ',' << (no_exact ? std::string("") : std::to_string(c.exact_slope_ml)) << ','
             << c.predicted_var_ml_noisy << '\n';
        }
      }
      const auto bands = wcr::robustness_bands(r);
      json cells = json::array();
      for (const auto& c : r.cells) {
        json cell{{"eps", c.eps},
                  {"var_w_noisy", to_json(c.var_w_noisy)},
                  {"var_ml_noisy", to_json(c.var_ml_noisy)},
                  {"slope_w", c.slope_w},
                  {"slope_w_se", c.slope_w_se},
                  {"predicted_slope_w", c.predicted_slope_w},
                  {"slope_ml", c.slope_ml},
                  {"slope_ml_se", c.slope_ml_se},
                  {"predicted_slope_ml", c.predicted_slope_ml},
                  {"predicted_var_ml_noisy", c.predicted_var_ml_noisy}};
        if (!no_exact) cell["exact_slope_ml_finite_n"] = c.exact_slope_ml;
        cells.push_back(cell);
      }
      json j{{"sigma", r.sigma},
             {"n", r.n},
             {"trials", r.trials},
             {"var_w_clean", to_json(r.var_w_clean)},
             {"var_ml_clean", to_json(r.var_ml_clean)},
             {"cells", cells},
             {"bands", to_json(bands)},
             {"passed", all_passed(bands)}};
      if (!no_exact) j["exact_var_ml_clean_finite_n"] = r.exact_var_ml_clean;
      std::cout << j.dump(2) << '\n';
      return all_passed(bands) ? 0 : 1;
    }
  } catch (const wcr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
