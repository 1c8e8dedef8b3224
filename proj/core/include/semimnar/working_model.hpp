#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/data.hpp"

namespace semimnar {

/// One product term of the working design, e.g. "1", "x1", "x2^2", "x1*x2^3".
struct DesignTerm {
  std::string label;
  std::vector<std::pair<std::size_t, int>> factors;  // (covariate index, power); empty = intercept
};

/// Feature map x -> (t_1(x), ..., t_p(x)) over the concatenated (x1, x2)
/// covariates, built from term strings that name dataset columns.
class Design {
 public:
  Design() = default;
  Design(const std::vector<std::string>& terms, const Dataset& schema);

  std::size_t size() const noexcept { return terms_.size(); }
  const std::vector<DesignTerm>& terms() const noexcept { return terms_; }
  std::vector<std::string> labels() const;

  void features(std::span<const double> x, Eigen::Ref<Eigen::VectorXd> out) const;
  Eigen::VectorXd features(std::span<const double> x) const;

 private:
  std::vector<DesignTerm> terms_;
};

/// Gaussian linear working model for y given x among respondents.
struct OutcomeWorkingModel {
  Design design;
  Eigen::VectorXd beta;
  double sigma2 = 0.0;

  double mean(std::span<const double> x) const;
};

/// Intercept plus every covariate linearly.
std::vector<std::string> default_design(const Dataset& schema);

OutcomeWorkingModel fit_working_model(const Dataset& data, const Design& design);
OutcomeWorkingModel fit_working_model(const Dataset& data, const std::vector<std::string>& terms);

struct FractionalSample {
  std::vector<double> draws;
  std::size_t s() const noexcept { return draws.size(); }
};

FractionalSample draw_fractional(const OutcomeWorkingModel& model, std::span<const double> x,
                                 std::size_t s, std::mt19937_64& rng);

/// Self-normalized tilt average sum_j e^{gamma y_j} e(y_j) / sum_j e^{gamma y_j}.
double fi_tilted_expectation(const FractionalSample& sample, double gamma,
                             const std::function<double(double)>& e_fn);

/// The normalized tilt weights behind fi_tilted_expectation.
std::vector<double> fi_tilt_weights(const FractionalSample& sample, double gamma);

struct TiltedMoments {
  double m0 = 0.0;     // E[e^{gamma Y}]
  double m1 = 0.0;     // E[e^{gamma Y} Y]
  double m0_2g = 0.0;  // E[e^{2 gamma Y}]
  double m1_2g = 0.0;  // E[e^{2 gamma Y} Y]
};

/// Normal moment generating function identities for Y ~ N(mu, sigma2).
TiltedMoments analytic_tilted_moments(double mu, double sigma2, double gamma);
TiltedMoments analytic_tilted_moments(const OutcomeWorkingModel& model, std::span<const double> x,
                                      double gamma);

/// Deterministic 64-bit seed mixing (splitmix64 finalizer over seed and stream).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace semimnar
