#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/profile.hpp"
#include "semimnar/working_model.hpp"

namespace semimnar {

/// The conditional expectations among nonrespondents that the estimators need.
enum class E0Functional {
  y,       // E0{Y | x}
  pi_y,    // E0{pi(X1, Y) Y | x}
  inv_pi,  // E0{1 / pi(X1, Y) | x}
};

/// Estimates E0{. | x_i} at sample rows for a response model state.
class E0Engine {
 public:
  virtual ~E0Engine() = default;

  virtual std::string name() const = 0;
  virtual const Sample& sample() const = 0;

  /// Values for each entry of `rows`, in the same order.
  virtual Eigen::VectorXd evaluate(E0Functional f, const ProfileState& st,
                                   std::span<const std::size_t> rows) const = 0;
  Eigen::VectorXd evaluate(E0Functional f, const ProfileState& st) const;

  /// Several functionals at every row, one column each.
  virtual Eigen::MatrixXd evaluate_many(std::span<const E0Functional> fs,
                                        const ProfileState& st) const;

  /// h(x_i) = E{log(1 - pi_st(X1, Y)) | x_i} under the tilt exp(gamma_t y).
  virtual Eigen::VectorXd log1m_pi(double gamma_t, const ProfileState& st,
                                   std::span<const std::size_t> rows) const = 0;
};

/// Kernel / cell smoothing over the full covariate x.
class NonparametricE0 final : public E0Engine {
 public:
  explicit NonparametricE0(const Sample& s) : s_(s) {}
  std::string name() const override { return "nonparam"; }
  const Sample& sample() const override { return s_; }
  using E0Engine::evaluate;
  Eigen::VectorXd evaluate(E0Functional f, const ProfileState& st,
                           std::span<const std::size_t> rows) const override;
  Eigen::VectorXd log1m_pi(double gamma_t, const ProfileState& st,
                           std::span<const std::size_t> rows) const override;

 private:
  const Sample& s_;
};

/// Fractional imputation from the working model: s draws per row, generated
/// once at construction and reused for every gamma.
class FractionalE0 final : public E0Engine {
 public:
  FractionalE0(const Sample& s, OutcomeWorkingModel model, std::size_t draws, std::uint64_t seed);
  std::string name() const override { return "fi"; }
  const Sample& sample() const override { return s_; }
  using E0Engine::evaluate;
  Eigen::VectorXd evaluate(E0Functional f, const ProfileState& st,
                           std::span<const std::size_t> rows) const override;
  Eigen::MatrixXd evaluate_many(std::span<const E0Functional> fs,
                                const ProfileState& st) const override;
  Eigen::VectorXd log1m_pi(double gamma_t, const ProfileState& st,
                           std::span<const std::size_t> rows) const override;

  std::size_t draws_per_row() const noexcept { return s_draws_; }
  std::span<const double> draws(std::size_t row) const {
    return {draws_.data() + row * s_draws_, s_draws_};
  }
  const OutcomeWorkingModel& model() const noexcept { return model_; }

 private:
  const Sample& s_;
  OutcomeWorkingModel model_;
  std::size_t s_draws_;
  std::vector<double> draws_;  // row-major, n x s
  std::vector<double> row_min_, row_max_;
};

/// Closed-form Gaussian tilting. Supports E0{Y|x} and E0{1/pi|x} only.
class AnalyticE0 final : public E0Engine {
 public:
  AnalyticE0(const Sample& s, OutcomeWorkingModel model);
  std::string name() const override { return "analytic"; }
  const Sample& sample() const override { return s_; }
  using E0Engine::evaluate;
  Eigen::VectorXd evaluate(E0Functional f, const ProfileState& st,
                           std::span<const std::size_t> rows) const override;
  Eigen::VectorXd log1m_pi(double gamma_t, const ProfileState& st,
                           std::span<const std::size_t> rows) const override;

  const OutcomeWorkingModel& model() const noexcept { return model_; }

 private:
  const Sample& s_;
  OutcomeWorkingModel model_;
  Eigen::VectorXd mu_;
};

/// All row indices 0..n-1.
std::vector<std::size_t> all_rows(std::size_t n);

}  // namespace semimnar
