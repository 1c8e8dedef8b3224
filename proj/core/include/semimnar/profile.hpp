#pragma once

#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/data.hpp"
#include "semimnar/smoothing.hpp"

namespace semimnar {

/// Response probabilities are clipped to [kPiClip, 1 - kPiClip].
inline constexpr double kPiClip = 1e-8;

/// Smoother choice for the two conditioning sets. Coordinates declared
/// discrete are always stratified exactly; bandwidths apply to continuous ones.
struct SmoothingOptions {
  KernelId kernel = KernelId::gaussian;
  std::optional<double> bandwidth_g;  // smoothing over x1 (the g component)
  std::optional<double> bandwidth_x;  // smoothing over the full covariate x
};

/// Columnar view of a dataset with its two conditional-mean engines built
/// once. Everything downstream evaluates at sample points through this.
class Sample {
 public:
  Sample(const Dataset& data, const SmoothingOptions& opt);

  const Dataset& data() const noexcept { return *data_; }
  std::size_t size() const noexcept { return n_; }
  const Eigen::VectorXd& delta() const noexcept { return delta_; }
  /// Observed outcomes; NaN on nonrespondent rows so accidental use is loud.
  const Eigen::VectorXd& y() const noexcept { return y_; }
  const std::vector<std::size_t>& respondents() const noexcept { return respondents_; }
  const std::vector<std::size_t>& nonrespondents() const noexcept { return nonrespondents_; }
  bool is_respondent(std::size_t i) const noexcept { return delta_[static_cast<Eigen::Index>(i)] > 0.5; }

  /// Engines are built on first use. A missing bandwidth for a set with
  /// continuous coordinates defaults to the rule of thumb on those coordinates.
  const ConditionalSmoother& by_x1() const;
  const ConditionalSmoother& by_x() const;
  const SmoothingOptions& options() const noexcept { return opt_; }
  /// Bandwidths actually used (nullopt when the set is purely discrete).
  std::optional<double> bandwidth_g() const;
  std::optional<double> bandwidth_x() const;

  /// Per-row tilt weights delta_j exp(gamma y_j - c) with c the maximum of
  /// gamma y over respondents in the row's stratum of `sm`; `shift` receives c
  /// for each row's own stratum.
  Eigen::VectorXd tilt_weights(const ConditionalSmoother& sm, double gamma,
                               Eigen::VectorXd& shift) const;

 private:
  std::shared_ptr<const Dataset> data_;
  SmoothingOptions opt_;
  std::size_t n_ = 0;
  Eigen::VectorXd delta_, y_;
  std::vector<std::size_t> respondents_, nonrespondents_;

  struct LazySmoother {
    std::vector<std::vector<double>> points;
    std::vector<VariableKind> kinds;
    std::vector<std::string> names;
    std::optional<double> h;
    mutable std::once_flag once;
    mutable std::unique_ptr<ConditionalSmoother> engine;
  };
  const ConditionalSmoother& build(const LazySmoother& lz) const;
  LazySmoother x1_set_, x_set_;
};

/// Response model at one gamma, evaluated at every sample row.
struct ProfileState {
  double gamma = 0.0;
  Eigen::VectorXd log_eg;  // g(x1_i)
  Eigen::VectorXd pi;      // pi(x1_i, y_i) on respondents, NaN otherwise
  int clip_count = 0;

  /// Clipped pi(x1_i, y) for an arbitrary outcome value.
  double pi_at(std::size_t i, double y) const;
  /// (1 - pi) / pi = exp(-g + gamma y), unclipped.
  double odds_at(std::size_t i, double y) const;
  /// delta_i / pi_i - 1 for row i of `s`.
  double calibration_weight(const Sample& s, std::size_t i) const;
};

double clip_probability(double p, int* clip_counter = nullptr);

/// Produces the response model at a trial gamma. The profiled form is the
/// estimator; the known-g form is a test hook that bypasses profiling.
class ResponseFitter {
 public:
  virtual ~ResponseFitter() = default;
  virtual ProfileState fit(double gamma) const = 0;
  virtual const Sample& sample() const = 0;
};

class ProfileFitter final : public ResponseFitter {
 public:
  explicit ProfileFitter(const Sample& s) : s_(s) {}
  ProfileState fit(double gamma) const override;
  const Sample& sample() const override { return s_; }

 private:
  const Sample& s_;
};

class KnownGFitter final : public ResponseFitter {
 public:
  KnownGFitter(const Sample& s, std::function<double(std::span<const double>)> g)
      : s_(s), g_(std::move(g)) {}
  ProfileState fit(double gamma) const override;
  const Sample& sample() const override { return s_; }

 private:
  const Sample& s_;
  std::function<double(std::span<const double>)> g_;
};

/// gamma plus the profiled map x1 -> exp{g(x1)}, evaluable anywhere in the
/// fitted support.
class ProfiledResponseModel {
 public:
  ProfiledResponseModel(std::shared_ptr<const Sample> s, double gamma);

  double gamma() const noexcept { return gamma_; }
  double exp_g(std::span<const double> x1) const;
  double log_g(std::span<const double> x1) const;
  const ProfileState& state() const noexcept { return state_; }
  const Sample& sample() const noexcept { return *s_; }
  bool is_cell() const noexcept { return s_->by_x1().purely_discrete(); }

 private:
  std::shared_ptr<const Sample> s_;
  double gamma_;
  Eigen::VectorXd num_, den_;  // tilted respondent mass and nonrespondent mass
  double num_shift_ = 0.0;     // num_ is scaled by exp(-num_shift_)
  ProfileState state_;
};

ProfiledResponseModel fit_profile_g(const Dataset& data, double gamma,
                                    const SmoothingOptions& opt = {});

/// Clipped profile response probability, computed in log space.
double profile_pi(const ProfiledResponseModel& model, std::span<const double> x1, double y);

/// E0{e(X, Y) | x} estimated by tilting respondents with exp(gamma y).
class TiltedExpectation {
 public:
  TiltedExpectation(std::shared_ptr<const Sample> s, double gamma,
                    const std::function<double(const Observation&)>& e_fn);

  double evaluate(std::span<const double> x) const;
  /// Values at every sample point.
  const Eigen::VectorXd& at_samples() const noexcept { return at_samples_; }

 private:
  std::shared_ptr<const Sample> s_;
  Eigen::VectorXd num_, den_;
  Eigen::VectorXd at_samples_;
};

TiltedExpectation tilted_e0(const Dataset& data, double gamma,
                            const std::function<double(const Observation&)>& e_fn,
                            const SmoothingOptions& opt = {});

/// Tilted smoothing of per-row values: for each row i,
///   sum_j K(i,j) delta_j e^{gamma y_j} v_j / sum_j K(i,j) delta_j e^{gamma y_j}
/// over the conditioning set of `sm` (one of the sample's two engines).
/// Only respondent entries of v are read.
Eigen::VectorXd tilted_smooth(const Sample& s, const ConditionalSmoother& sm, double gamma,
                              const Eigen::VectorXd& v);

/// Concatenated (x1, x2) coordinates of one observation.
std::vector<double> full_covariates(const Observation& o);

}  // namespace semimnar
