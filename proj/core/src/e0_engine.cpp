#include "semimnar/e0_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "semimnar/errors.hpp"
#include "semimnar/root_finding.hpp"

namespace semimnar {

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> r(n);
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

Eigen::VectorXd E0Engine::evaluate(E0Functional f, const ProfileState& st) const {
  const auto rows = all_rows(sample().size());
  return evaluate(f, st, rows);
}

Eigen::MatrixXd E0Engine::evaluate_many(std::span<const E0Functional> fs,
                                        const ProfileState& st) const {
  const auto rows = all_rows(sample().size());
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(fs.size()));
  for (std::size_t c = 0; c < fs.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = evaluate(fs[c], st, rows);
  return out;
}

namespace {

Eigen::VectorXd pick(const Eigen::VectorXd& full, std::span<const std::size_t> rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k)
    out[static_cast<Eigen::Index>(k)] = full[static_cast<Eigen::Index>(rows[k])];
  return out;
}

double log1m(double p) { return std::log1p(-p); }

}  // namespace

// --- nonparametric ---------------------------------------------------------

Eigen::VectorXd NonparametricE0::evaluate(E0Functional f, const ProfileState& st,
                                          std::span<const std::size_t> rows) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s_.size()));
  for (auto j : s_.respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    const double y = s_.y()[idx];
    const double pi = st.pi[idx];
    switch (f) {
      case E0Functional::y: v[idx] = y; break;
      case E0Functional::pi_y: v[idx] = pi * y; break;
      case E0Functional::inv_pi: v[idx] = 1.0 / pi; break;
    }
  }
  return pick(tilted_smooth(s_, s_.by_x(), st.gamma, v), rows);
}

Eigen::VectorXd NonparametricE0::log1m_pi(double gamma_t, const ProfileState& st,
                                          std::span<const std::size_t> rows) const {
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s_.size()));
  for (auto j : s_.respondents()) {
    const auto idx = static_cast<Eigen::Index>(j);
    v[idx] = log1m(st.pi[idx]);
  }
  return pick(tilted_smooth(s_, s_.by_x(), gamma_t, v), rows);
}

// --- fractional imputation -------------------------------------------------

FractionalE0::FractionalE0(const Sample& s, OutcomeWorkingModel model, std::size_t draws,
                           std::uint64_t seed)
    : s_(s), model_(std::move(model)), s_draws_(draws) {
  if (draws == 0) throw ConfigError("fractional imputation needs at least one draw per row");
  const std::size_t n = s_.size();
  draws_.resize(n * s_draws_);
  row_min_.resize(n);
  row_max_.resize(n);
  const double sd = std::sqrt(model_.sigma2);
  std::mt19937_64 rng(derive_seed(seed, 0));
  std::normal_distribution<double> z;
  Eigen::VectorXd feat(static_cast<Eigen::Index>(model_.design.size()));
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = full_covariates(s_.data()[i]);
    model_.design.features(x, feat);
    const double mu = feat.dot(model_.beta);
    double* row = draws_.data() + i * s_draws_;
    for (std::size_t j = 0; j < s_draws_; ++j) row[j] = mu + sd * z(rng);
    const auto [mn, mx] = std::minmax_element(row, row + s_draws_);
    row_min_[i] = *mn;
    row_max_[i] = *mx;
  }
}

namespace {

using ConstRow = Eigen::Map<const Eigen::ArrayXd>;

}  // namespace

Eigen::VectorXd FractionalE0::evaluate(E0Functional f, const ProfileState& st,
                                       std::span<const std::size_t> rows) const {
  const double gamma = st.gamma;
  const auto s = static_cast<Eigen::Index>(s_draws_);
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  Eigen::ArrayXd w(s), pi(s);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    const ConstRow yd(draws_.data() + i * s_draws_, s);
    const double c = gamma >= 0.0 ? gamma * row_max_[i] : gamma * row_min_[i];
    w = (gamma * yd - c).exp();
    const double wsum = w.sum();
    double acc = 0.0;
    if (f == E0Functional::y) {
      acc = (w * yd).sum();
    } else {
      // odds (1 - pi)/pi = exp(-g + gamma y) = a * w_j
      const double a = std::exp(-st.log_eg[static_cast<Eigen::Index>(i)] + c);
      pi = (1.0 / (1.0 + a * w)).max(kPiClip).min(1.0 - kPiClip);
      acc = f == E0Functional::pi_y ? (w * pi * yd).sum() : (w / pi).sum();
    }
    out[static_cast<Eigen::Index>(k)] = acc / wsum;
  }
  return out;
}

Eigen::MatrixXd FractionalE0::evaluate_many(std::span<const E0Functional> fs,
                                            const ProfileState& st) const {
  const double gamma = st.gamma;
  const auto s = static_cast<Eigen::Index>(s_draws_);
  const auto n = static_cast<Eigen::Index>(s_.size());
  Eigen::MatrixXd out(n, static_cast<Eigen::Index>(fs.size()));
  const bool need_pi = std::any_of(fs.begin(), fs.end(), [](E0Functional f) { return f != E0Functional::y; });
  Eigen::ArrayXd w(s), pi(s);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    const ConstRow yd(draws_.data() + row * s_draws_, s);
    const double c = gamma >= 0.0 ? gamma * row_max_[row] : gamma * row_min_[row];
    w = (gamma * yd - c).exp();
    const double wsum = w.sum();
    if (need_pi) {
      const double a = std::exp(-st.log_eg[i] + c);
      pi = (1.0 / (1.0 + a * w)).max(kPiClip).min(1.0 - kPiClip);
    }
    for (std::size_t k = 0; k < fs.size(); ++k) {
      double acc = 0.0;
      switch (fs[k]) {
        case E0Functional::y: acc = (w * yd).sum(); break;
        case E0Functional::pi_y: acc = (w * pi * yd).sum(); break;
        case E0Functional::inv_pi: acc = (w / pi).sum(); break;
      }
      out(i, static_cast<Eigen::Index>(k)) = acc / wsum;
    }
  }
  return out;
}

Eigen::VectorXd FractionalE0::log1m_pi(double gamma_t, const ProfileState& st,
                                       std::span<const std::size_t> rows) const {
  const auto s = static_cast<Eigen::Index>(s_draws_);
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  Eigen::ArrayXd w(s), h(s);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const std::size_t i = rows[k];
    const ConstRow yd(draws_.data() + i * s_draws_, s);
    const double g = st.log_eg[static_cast<Eigen::Index>(i)];
    const double c = gamma_t >= 0.0 ? gamma_t * row_max_[i] : gamma_t * row_min_[i];
    w = (gamma_t * yd - c).exp();
    for (Eigen::Index j = 0; j < s; ++j) h[j] = log1m(clip_probability(expit(g - st.gamma * yd[j])));
    out[static_cast<Eigen::Index>(k)] = (w * h).sum() / w.sum();
  }
  return out;
}

// --- analytic --------------------------------------------------------------

AnalyticE0::AnalyticE0(const Sample& s, OutcomeWorkingModel model)
    : s_(s), model_(std::move(model)) {
  mu_.resize(static_cast<Eigen::Index>(s_.size()));
  for (std::size_t i = 0; i < s_.size(); ++i)
    mu_[static_cast<Eigen::Index>(i)] = model_.mean(full_covariates(s_.data()[i]));
}

Eigen::VectorXd AnalyticE0::evaluate(E0Functional f, const ProfileState& st,
                                     std::span<const std::size_t> rows) const {
  const double gamma = st.gamma;
  const double s2 = model_.sigma2;
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(rows[k]);
    const double mu = mu_[i];
    switch (f) {
      case E0Functional::y:
        out[static_cast<Eigen::Index>(k)] = mu + gamma * s2;
        break;
      case E0Functional::inv_pi: {
        // (m0 + e^{-g} m0_2g) / m0, with log(m0_2g / m0) = gamma mu + 1.5 gamma^2 sigma^2
        out[static_cast<Eigen::Index>(k)] =
            1.0 + std::exp(-st.log_eg[i] + gamma * mu + 1.5 * gamma * gamma * s2);
        break;
      }
      case E0Functional::pi_y:
        throw ConfigError("analytic engine has no closed form for E0{pi Y | x}");
    }
  }
  return out;
}

Eigen::VectorXd AnalyticE0::log1m_pi(double, const ProfileState&,
                                     std::span<const std::size_t>) const {
  throw ConfigError("analytic engine has no closed form for E0{log(1 - pi) | x}");
}

}  // namespace semimnar
