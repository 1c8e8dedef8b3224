#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/gamma_estimators.hpp"

namespace semimnar {

enum class MuMethod { ipw, mp, db, w_mp, w_db };

const std::vector<std::string>& mu_method_ids();
MuMethod parse_mu_method(const std::string& id);
std::string to_string(MuMethod m);

/// How the working-model variants compute E0{Y|x}.
enum class WorkingMean { analytic, fractional };

struct MuOptions {
  WorkingMean working_mean = WorkingMean::analytic;
  std::vector<std::string> design;  // used when the gamma fit carried no working model
  std::size_t fi_draws = 500;
  std::uint64_t seed = 0;
};

struct MuEstimate {
  MuMethod method = MuMethod::ipw;
  double value = 0.0;
  double gamma_used = 0.0;
  std::string engine;   // "none", "nonparam", "analytic", "fi"
  Eigen::VectorXd e0_y; // E0{Y|x_i} at every row (empty for ipw)
};

/// (1/n) sum delta_i y_i / pi_i.
double mu_ipw(const Sample& s, const ProfileState& st);
double mu_ipw(const ProfiledResponseModel& model);
/// (1/n) sum [delta_i y_i + (1 - delta_i) e0y_i].
double mu_mp(const Sample& s, const Eigen::VectorXd& e0y);
/// (1/n) sum [delta_i y_i / pi_i + (1 - delta_i / pi_i) e0y_i].
double mu_db(const Sample& s, const ProfileState& st, const Eigen::VectorXd& e0y);

MuEstimate estimate_mu(const Sample& s, const GammaFit& fit, MuMethod method,
                       const MuOptions& opt = {});

}  // namespace semimnar
