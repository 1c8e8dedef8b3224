#include "semimnar/inference.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "semimnar/errors.hpp"

namespace semimnar {

namespace {

constexpr double kJacobianFloor = 1e-10;

double emp_cov(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double n = static_cast<double>(a.size());
  return ((a.array() - a.mean()) * (b.array() - b.mean())).sum() / n;
}

}  // namespace

GammaSandwich gamma_sandwich(const Sample& s, const ProfileState& st, const Eigen::MatrixXd& m) {
  const auto n = static_cast<Eigen::Index>(s.size());
  const Eigen::Index k = m.cols();
  const double nd = static_cast<double>(n);
  const auto& sm = s.by_x1();

  GammaSandwich g;
  g.e0y_x1 = tilted_smooth(s, sm, st.gamma, s.y());
  g.m_center.resize(n, k);
  for (Eigen::Index c = 0; c < k; ++c)
    g.m_center.col(c) = m.col(c) - tilted_smooth(s, sm, st.gamma, m.col(c));

  g.A = Eigen::VectorXd::Zero(k);
  g.psi.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    const double w = st.calibration_weight(s, row);
    g.psi.row(i) = w * g.m_center.row(i);
    if (s.is_respondent(row)) {
      const double pi = st.pi[i];
      const double odds = (1.0 - pi) / pi;
      g.A += odds * (s.y()[i] - g.e0y_x1[i]) * g.m_center.row(i).transpose();
    }
  }
  g.A /= nd;
  g.B = g.psi.transpose() * g.psi / nd;

  if (k == 1) {
    const double a = g.A[0];
    if (!(std::fabs(a) >= kJacobianFloor))
      throw NearSingularJacobian("sandwich derivative is numerically zero (|A| < 1e-10)");
    g.influence = -g.psi.col(0) / a;
    g.variance = g.B(0, 0) / (nd * a * a);
  } else {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(g.B);
    const Eigen::VectorXd binv_a = ldlt.solve(g.A);
    const double info = g.A.dot(binv_a);
    if (ldlt.info() != Eigen::Success || !(info >= kJacobianFloor))
      throw NearSingularJacobian("sandwich information A^T B^-1 A is numerically zero");
    g.influence = -(g.psi * binv_a) / info;
    g.variance = 1.0 / (nd * info);
  }
  if (!(g.variance >= 0.0)) throw NumericalError("gamma variance is not a nonnegative number");
  return g;
}

double variance_gamma(const Sample& s, const ProfileState& st, const Eigen::MatrixXd& m) {
  return gamma_sandwich(s, st, m).variance;
}

GammaSandwich gamma_sandwich(const Sample& s, const GammaFit& fit) {
  return gamma_sandwich(s, fit.state, fit.moment->evaluate(fit.state));
}

MuInfluence mu_influence(const Sample& s, const ProfileState& st, MuMethod method,
                         const Eigen::VectorXd& e0y, const Eigen::VectorXd& e0y_x1) {
  const auto n = static_cast<Eigen::Index>(s.size());
  const bool ipw = method == MuMethod::ipw;
  const Eigen::VectorXd& center = ipw ? e0y_x1 : e0y;
  MuInfluence out;
  out.terms.resize(n);
  double h = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = static_cast<std::size_t>(i);
    if (s.is_respondent(row)) {
      const double pi = st.pi[i];
      const double y = s.y()[i];
      out.terms[i] = center[i] + (y - center[i]) / pi;
      h += (1.0 - pi) / pi * (y - center[i]) * (y - e0y_x1[i]);
    } else {
      out.terms[i] = center[i];
    }
  }
  out.H = h / static_cast<double>(n);
  return out;
}

double variance_mu(const MuInfluence& inf, double var_gamma, const Eigen::VectorXd& gamma_influence) {
  const double n = static_cast<double>(inf.terms.size());
  const double c = gamma_influence.size() == inf.terms.size() ? emp_cov(inf.terms, gamma_influence) : 0.0;
  const double v = emp_cov(inf.terms, inf.terms) / n + inf.H * inf.H * var_gamma + 2.0 * inf.H * c / n;
  return std::max(v, 0.0);
}

double variance_mu(const Sample& s, const ProfileState& st, MuMethod method,
                   const Eigen::VectorXd& e0y, const GammaSandwich& gs) {
  return variance_mu(mu_influence(s, st, method, e0y, gs.e0y_x1), gs.variance, gs.influence);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("normal quantile needs 0 < p < 1");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

std::pair<double, double> wald_ci(double estimate, double variance, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (!(variance >= 0.0)) throw NumericalError("variance must be nonnegative");
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(variance);
  return {estimate - half, estimate + half};
}

EstimateReport make_report(std::string target, std::string estimator, double estimate,
                           double variance, double alpha, std::size_t n, std::string engine,
                           const SmoothingOptions& smoothing) {
  EstimateReport r;
  r.target = std::move(target);
  r.estimator = std::move(estimator);
  r.estimate = estimate;
  r.variance = variance;
  r.alpha = alpha;
  std::tie(r.ci_lo, r.ci_hi) = wald_ci(estimate, variance, alpha);
  r.n = n;
  r.engine = std::move(engine);
  r.bandwidth_g = smoothing.bandwidth_g;
  r.bandwidth_x = smoothing.bandwidth_x;
  return r;
}

}  // namespace semimnar
