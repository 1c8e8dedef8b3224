#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "semimnar/e0_engine.hpp"
#include "semimnar/profile.hpp"
#include "semimnar/root_finding.hpp"

namespace semimnar {

enum class GammaMethod { p_gmm, p_score, p_ca1, p_ca2, pw_score, pw_ca1, pw_ca2_s, pw_ca2_a, p_mle };

const std::vector<std::string>& gamma_method_ids();
GammaMethod parse_gamma_method(const std::string& id);
std::string to_string(GammaMethod m);
bool uses_working_model(GammaMethod m);

/// Columns of the fixed moment used by p-gmm.
enum class InstrumentMode {
  x2,         // the raw instrument coordinates
  x2_levels,  // indicators of all but the last level of each discrete instrument
  x1,         // the x1 coordinates (degenerate when x1 is discrete)
};

InstrumentMode parse_instrument_mode(const std::string& s);
std::string to_string(InstrumentMode m);

struct GammaOptions {
  double lo = -3.0;
  double hi = 3.0;
  RootOptions root;
  int scan_points = 12;  // grid cells scanned for sign changes before Brent
  InstrumentMode instrument = InstrumentMode::x2;
  std::size_t fi_draws = 500;
  std::uint64_t seed = 0;
  std::vector<std::string> design;  // working-model terms for pw-* methods
  double em_tol = 1e-6;
  int em_max_iter = 500;
  double gamma_init = 0.0;
};

/// m(x; gamma) evaluated at every sample row, n x arity.
class MomentFunction {
 public:
  virtual ~MomentFunction() = default;
  virtual std::size_t arity() const = 0;
  virtual std::string name() const = 0;
  virtual Eigen::MatrixXd evaluate(const ProfileState& st) const = 0;
};

/// A moment that does not depend on gamma.
class FixedMoment final : public MomentFunction {
 public:
  FixedMoment(Eigen::MatrixXd values, std::string name)
      : values_(std::move(values)), name_(std::move(name)) {}
  std::size_t arity() const override { return static_cast<std::size_t>(values_.cols()); }
  std::string name() const override { return name_; }
  Eigen::MatrixXd evaluate(const ProfileState&) const override { return values_; }

 private:
  Eigen::MatrixXd values_;
  std::string name_;
};

/// m = E0{pi Y | x}.
class Ca1Moment final : public MomentFunction {
 public:
  explicit Ca1Moment(const E0Engine& e) : e_(e) {}
  std::size_t arity() const override { return 1; }
  std::string name() const override { return "ca1"; }
  Eigen::MatrixXd evaluate(const ProfileState& st) const override;

 private:
  const E0Engine& e_;
};

/// m = E0{Y | x} / E0{1/pi | x}.
class Ca2Moment final : public MomentFunction {
 public:
  explicit Ca2Moment(const E0Engine& e) : e_(e) {}
  std::size_t arity() const override { return 1; }
  std::string name() const override { return "ca2"; }
  Eigen::MatrixXd evaluate(const ProfileState& st) const override;

 private:
  const E0Engine& e_;
};

FixedMoment instrument_moment(const Sample& s, InstrumentMode mode);

/// (1/n) sum_i (delta_i / pi_i - 1) m_i for a fixed moment matrix.
Eigen::VectorXd calibration_residual(const Sample& s, const ProfileState& st,
                                     const Eigen::MatrixXd& m);
/// Same with pi and m both re-evaluated at gamma.
Eigen::VectorXd calibration_residual(const ResponseFitter& fitter, double gamma,
                                     const MomentFunction& m);

/// (1/n) sum_i [delta_i (1 - pi_i) y_i - (1 - delta_i) E0{pi Y | x_i}].
double score_residual(const ResponseFitter& fitter, double gamma, const E0Engine& e0);
double score_residual(const Sample& s, const ProfileState& st, const E0Engine& e0);

struct GammaSolveResult {
  std::string method;
  double gamma_hat = 0.0;
  double residual = 0.0;  // |moment| (scalar) or its Euclidean norm
  int iterations = 0;
  int evaluations = 0;
  double lo = 0.0, hi = 0.0;  // bracket finally used
  bool bracket_expanded = false;
  int clip_count = 0;
  std::vector<std::string> diagnostics;
};

/// Root of a scalar residual. The bracket is scanned on a grid; among the
/// sign-change cells the upward crossing nearest gamma_init is refined by
/// Brent. The bracket is doubled once when no cell changes sign.
GammaSolveResult solve_scalar_root(const std::function<double(double)>& f,
                                   const GammaOptions& opt);

GammaSolveResult solve_p_gmm(const ResponseFitter& fitter, const MomentFunction& m,
                             const GammaOptions& opt = {});
GammaSolveResult solve_ca(const ResponseFitter& fitter, const MomentFunction& m,
                          const GammaOptions& opt = {});
GammaSolveResult solve_score(const ResponseFitter& fitter, const E0Engine& e0,
                             const GammaOptions& opt = {});

/// Expected complete-data profile log-likelihood L(gamma) with the
/// nonrespondent part tilted at gamma_t.
double em_objective(const ResponseFitter& fitter, const E0Engine& e0, double gamma_t, double gamma);

GammaSolveResult solve_em_p_mle(const ResponseFitter& fitter, const E0Engine& e0,
                                double gamma_init, double tol, int max_iter,
                                const GammaOptions& opt = {});

/// Everything produced by one gamma estimation that later stages reuse.
struct GammaFit {
  GammaMethod method;
  GammaSolveResult result;
  ProfileState state;                      // at gamma_hat
  std::unique_ptr<E0Engine> engine;        // engine the estimator used
  std::unique_ptr<MomentFunction> moment;  // moment used for the sandwich
  std::optional<OutcomeWorkingModel> working;
};

/// Build the engine for a method. Working-model methods fit the design in opt.
std::unique_ptr<E0Engine> make_engine(const Sample& s, GammaMethod method, const GammaOptions& opt);

GammaFit estimate_gamma(const Sample& s, GammaMethod method, const GammaOptions& opt = {});

}  // namespace semimnar
