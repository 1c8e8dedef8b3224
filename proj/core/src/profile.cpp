#include "semimnar/profile.hpp"

#include <cmath>
#include <limits>

#include "semimnar/errors.hpp"
#include "semimnar/root_finding.hpp"

namespace semimnar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::optional<Bandwidth> maybe_bandwidth(const std::optional<double>& h) {
  if (!h) return std::nullopt;
  return Bandwidth(*h);
}

}  // namespace

std::vector<double> full_covariates(const Observation& o) {
  std::vector<double> x = o.x1;
  x.insert(x.end(), o.x2.begin(), o.x2.end());
  return x;
}

namespace {

std::optional<double> default_bandwidth(const std::vector<std::vector<double>>& points,
                                        const std::vector<VariableKind>& kinds,
                                        std::optional<double> given) {
  std::vector<std::size_t> cont;
  for (std::size_t k = 0; k < kinds.size(); ++k)
    if (!kinds[k].is_discrete()) cont.push_back(k);
  if (cont.empty()) return std::nullopt;
  if (given) return given;
  std::vector<std::vector<double>> sub;
  sub.reserve(points.size());
  for (const auto& p : points) {
    std::vector<double> r;
    for (auto k : cont) r.push_back(p[k]);
    sub.push_back(std::move(r));
  }
  const double h = rule_of_thumb_bandwidth(sub);
  if (!(h > 0.0)) throw DataError("continuous covariate has no spread; cannot pick a bandwidth");
  return h;
}

}  // namespace

Sample::Sample(const Dataset& data, const SmoothingOptions& opt)
    : data_(std::make_shared<const Dataset>(data)), opt_(opt), n_(data.size()) {
  if (n_ == 0) throw DataError("dataset is empty");
  delta_.resize(static_cast<Eigen::Index>(n_));
  y_.resize(static_cast<Eigen::Index>(n_));
  x1_set_.points.reserve(n_);
  x_set_.points.reserve(n_);
  for (std::size_t i = 0; i < n_; ++i) {
    const auto& o = data[i];
    const auto idx = static_cast<Eigen::Index>(i);
    if (o.delta == 1) {
      if (!o.y) throw DataError("row " + std::to_string(i) + ": respondent without y");
      delta_[idx] = 1.0;
      y_[idx] = *o.y;
      respondents_.push_back(i);
    } else {
      delta_[idx] = 0.0;
      y_[idx] = kNaN;
      nonrespondents_.push_back(i);
    }
    x1_set_.points.push_back(o.x1);
    x_set_.points.push_back(full_covariates(o));
  }
  if (respondents_.empty()) throw DataError("no respondents: every y is missing");
  x1_set_.kinds = data.x1_kinds();
  x1_set_.names = data.x1_names();
  x_set_.kinds = data.x1_kinds();
  x_set_.kinds.insert(x_set_.kinds.end(), data.x2_kinds().begin(), data.x2_kinds().end());
  x_set_.names = data.x1_names();
  x_set_.names.insert(x_set_.names.end(), data.x2_names().begin(), data.x2_names().end());
  x1_set_.h = default_bandwidth(x1_set_.points, x1_set_.kinds, opt.bandwidth_g);
  x_set_.h = default_bandwidth(x_set_.points, x_set_.kinds, opt.bandwidth_x);
}

const ConditionalSmoother& Sample::build(const LazySmoother& lz) const {
  std::call_once(lz.once, [&] {
    lz.engine = std::make_unique<ConditionalSmoother>(lz.points, lz.kinds, maybe_bandwidth(lz.h),
                                                      opt_.kernel, lz.names);
  });
  return *lz.engine;
}

const ConditionalSmoother& Sample::by_x1() const { return build(x1_set_); }
const ConditionalSmoother& Sample::by_x() const { return build(x_set_); }
std::optional<double> Sample::bandwidth_g() const { return x1_set_.h; }
std::optional<double> Sample::bandwidth_x() const { return x_set_.h; }

Eigen::VectorXd Sample::tilt_weights(const ConditionalSmoother& sm, double gamma,
                                     Eigen::VectorXd& shift) const {
  std::vector<double> stratum_max(sm.num_strata(), kNegInf);
  for (auto j : respondents_) {
    auto& m = stratum_max[sm.stratum_of(j)];
    m = std::max(m, gamma * y_[static_cast<Eigen::Index>(j)]);
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  shift.resize(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < n_; ++i) shift[static_cast<Eigen::Index>(i)] = stratum_max[sm.stratum_of(i)];
  for (auto j : respondents_) {
    const auto idx = static_cast<Eigen::Index>(j);
    w[idx] = std::exp(gamma * y_[idx] - shift[idx]);
  }
  return w;
}

// ---------------------------------------------------------------------------

double clip_probability(double p, int* clip_counter) {
  if (p < kPiClip) {
    if (clip_counter) ++*clip_counter;
    return kPiClip;
  }
  if (p > 1.0 - kPiClip) {
    if (clip_counter) ++*clip_counter;
    return 1.0 - kPiClip;
  }
  return p;
}

double ProfileState::pi_at(std::size_t i, double y) const {
  return clip_probability(expit(log_eg[static_cast<Eigen::Index>(i)] - gamma * y));
}

double ProfileState::odds_at(std::size_t i, double y) const {
  return std::exp(-log_eg[static_cast<Eigen::Index>(i)] + gamma * y);
}

double ProfileState::calibration_weight(const Sample& s, std::size_t i) const {
  if (!s.is_respondent(i)) return -1.0;
  return 1.0 / pi[static_cast<Eigen::Index>(i)] - 1.0;
}

namespace {

ProfileState finish_state(const Sample& s, double gamma, Eigen::VectorXd log_eg) {
  ProfileState st;
  st.gamma = gamma;
  st.log_eg = std::move(log_eg);
  st.pi = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(s.size()), kNaN);
  for (auto j : s.respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    st.pi[idx] = clip_probability(expit(st.log_eg[idx] - gamma * s.y()[idx]), &st.clip_count);
  }
  return st;
}

}  // namespace

ProfileState ProfileFitter::fit(double gamma) const {
  const auto& sm = s_.by_x1();
  Eigen::VectorXd shift;
  const Eigen::VectorXd w = s_.tilt_weights(sm, gamma, shift);
  const Eigen::VectorXd one_minus_delta = Eigen::VectorXd::Ones(s_.delta().size()) - s_.delta();
  const Eigen::VectorXd num = sm.sums(w);
  const Eigen::VectorXd den = sm.sums(one_minus_delta);
  sm.check_mass(den);
  sm.check_mass(sm.sums(s_.delta()));
  Eigen::VectorXd log_eg(num.size());
  for (Eigen::Index i = 0; i < num.size(); ++i) {
    if (!(num[i] > 0.0)) throw DegenerateWindow(sm.describe(static_cast<std::size_t>(i)));
    log_eg[i] = std::log(num[i]) + shift[i] - std::log(den[i]);
  }
  return finish_state(s_, gamma, std::move(log_eg));
}

ProfileState KnownGFitter::fit(double gamma) const {
  Eigen::VectorXd log_eg(static_cast<Eigen::Index>(s_.size()));
  for (std::size_t i = 0; i < s_.size(); ++i)
    log_eg[static_cast<Eigen::Index>(i)] = g_(s_.data()[i].x1);
  return finish_state(s_, gamma, std::move(log_eg));
}

// ---------------------------------------------------------------------------

ProfiledResponseModel::ProfiledResponseModel(std::shared_ptr<const Sample> s, double gamma)
    : s_(std::move(s)), gamma_(gamma) {
  state_ = ProfileFitter(*s_).fit(gamma);
  const Eigen::Index n = static_cast<Eigen::Index>(s_->size());
  double c = kNegInf;
  for (auto j : s_->respondents()) c = std::max(c, gamma * s_->y()[static_cast<Eigen::Index>(j)]);
  num_ = Eigen::VectorXd::Zero(n);
  for (auto j : s_->respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    num_[idx] = std::exp(gamma * s_->y()[idx] - c);
  }
  den_ = Eigen::VectorXd::Ones(n) - s_->delta();
  num_shift_ = c;
}

double ProfiledResponseModel::log_g(std::span<const double> x1) const {
  const auto& sm = s_->by_x1();
  const double den = sm.sum_at(x1, den_);
  const double mass = sm.sum_at(x1, s_->delta());
  if (!(den >= kDenominatorFloor) || !(mass >= kDenominatorFloor)) {
    if (sm.purely_discrete()) throw EmptyCell(sm.describe_point(x1));
    throw DegenerateWindow(sm.describe_point(x1));
  }
  const double num = sm.sum_at(x1, num_);
  if (!(num > 0.0)) throw DegenerateWindow(sm.describe_point(x1));
  return std::log(num) + num_shift_ - std::log(den);
}

double ProfiledResponseModel::exp_g(std::span<const double> x1) const {
  return std::exp(log_g(x1));
}

ProfiledResponseModel fit_profile_g(const Dataset& data, double gamma,
                                    const SmoothingOptions& opt) {
  return ProfiledResponseModel(std::make_shared<const Sample>(data, opt), gamma);
}

double profile_pi(const ProfiledResponseModel& model, std::span<const double> x1, double y) {
  return clip_probability(expit(model.log_g(x1) - model.gamma() * y));
}

// ---------------------------------------------------------------------------

TiltedExpectation::TiltedExpectation(std::shared_ptr<const Sample> s, double gamma,
                                     const std::function<double(const Observation&)>& e_fn)
    : s_(std::move(s)) {
  const auto& sm = s_->by_x();
  Eigen::VectorXd shift;
  den_ = s_->tilt_weights(sm, gamma, shift);
  num_ = Eigen::VectorXd::Zero(den_.size());
  for (auto j : s_->respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    num_[idx] = den_[idx] * e_fn(s_->data()[j]);
  }
  at_samples_ = sm.ratio(num_, den_, s_->delta());
}

double TiltedExpectation::evaluate(std::span<const double> x) const {
  const auto& sm = s_->by_x();
  const double mass = sm.sum_at(x, s_->delta());
  if (!(mass >= kDenominatorFloor)) {
    if (sm.purely_discrete()) throw EmptyCell(sm.describe_point(x));
    throw DegenerateWindow(sm.describe_point(x));
  }
  return sm.sum_at(x, num_) / sm.sum_at(x, den_);
}

Eigen::VectorXd tilted_smooth(const Sample& s, const ConditionalSmoother& sm, double gamma,
                              const Eigen::VectorXd& v) {
  Eigen::VectorXd shift;
  const Eigen::VectorXd w = s.tilt_weights(sm, gamma, shift);
  Eigen::VectorXd wv = Eigen::VectorXd::Zero(w.size());
  for (auto j : s.respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    wv[idx] = w[idx] * v[idx];
  }
  return sm.ratio(wv, w, s.delta());
}

TiltedExpectation tilted_e0(const Dataset& data, double gamma,
                            const std::function<double(const Observation&)>& e_fn,
                            const SmoothingOptions& opt) {
  return TiltedExpectation(std::make_shared<const Sample>(data, opt), gamma, e_fn);
}

}  // namespace semimnar
