#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/gamma_estimators.hpp"
#include "semimnar/mu_estimators.hpp"

namespace semimnar {

/// Ingredients of the sandwich for gamma-hat, kept so the mean variance can
/// reuse the per-row influence of gamma-hat.
struct GammaSandwich {
  Eigen::VectorXd A;         // derivative of the centred moment, one entry per column of m
  Eigen::MatrixXd B;         // second moment of the centred estimating function
  Eigen::VectorXd e0y_x1;    // E0(Y | x1_i)
  Eigen::MatrixXd m_center;  // m(x_i) - E0(m | x1_i)
  Eigen::MatrixXd psi;       // (delta_i / pi_i - 1)(m(x_i) - E0(m | x1_i))
  Eigen::VectorXd influence; // u_i, so that gamma-hat - gamma ~ mean(u)
  double variance = 0.0;
};

/// A = (1/n) sum delta_i O_i (y_i - E0(Y|x1_i)) (m_i - E0(m|x1_i))
/// B = (1/n) sum psi_i psi_i^T with psi_i = (delta_i/pi_i - 1)(m_i - E0(m|x1_i)).
/// Scalar m: variance B / (n A^2). Vector m: efficient GMM form 1 / (n A^T B^-1 A).
GammaSandwich gamma_sandwich(const Sample& s, const ProfileState& st, const Eigen::MatrixXd& m);

double variance_gamma(const Sample& s, const ProfileState& st, const Eigen::MatrixXd& m);

/// Same using the moment function of a finished gamma fit.
GammaSandwich gamma_sandwich(const Sample& s, const GammaFit& fit);

struct MuInfluence {
  Eigen::VectorXd terms;  // per-row influence terms of the mean estimator
  double H = 0.0;         // derivative of the mean estimator in gamma
};

MuInfluence mu_influence(const Sample& s, const ProfileState& st, MuMethod method,
                         const Eigen::VectorXd& e0y, const Eigen::VectorXd& e0y_x1);

/// var(terms)/n + H^2 var_gamma + 2 H cov(terms, u)/n.
double variance_mu(const MuInfluence& inf, double var_gamma, const Eigen::VectorXd& gamma_influence);

double variance_mu(const Sample& s, const ProfileState& st, MuMethod method,
                   const Eigen::VectorXd& e0y, const GammaSandwich& gs);

double normal_quantile(double p);
std::pair<double, double> wald_ci(double estimate, double variance, double alpha);

struct EstimateReport {
  std::string target;     // "gamma" or "mu"
  std::string estimator;  // method id
  double estimate = 0.0;
  double variance = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double alpha = 0.05;
  std::size_t n = 0;
  std::string engine;
  std::optional<double> bandwidth_g, bandwidth_x;
  std::vector<std::string> diagnostics;
};

EstimateReport make_report(std::string target, std::string estimator, double estimate,
                           double variance, double alpha, std::size_t n, std::string engine,
                           const SmoothingOptions& smoothing);

}  // namespace semimnar
