#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "fixtures.hpp"
#include "semimnar/e0_engine.hpp"
#include "semimnar/errors.hpp"
#include "semimnar/root_finding.hpp"

using namespace semimnar;

TEST(NonparametricE0, MarCaseIsRespondentCellMean) {
  const Dataset d = fixtures::discrete(400, 1);
  const Sample s(d, {});
  const ProfileState st = ProfileFitter(s).fit(0.0);
  const Eigen::VectorXd e = NonparametricE0(s).evaluate(E0Functional::y, st);
  std::map<std::pair<double, double>, std::pair<double, double>> cell;
  for (const auto& o : d.rows())
    if (o.delta) {
      cell[{o.x1[0], o.x2[0]}].first += *o.y;
      cell[{o.x1[0], o.x2[0]}].second += 1;
    }
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& c = cell[{d[i].x1[0], d[i].x2[0]}];
    EXPECT_NEAR(e[static_cast<Eigen::Index>(i)], c.first / c.second, 1e-12);
  }
}

TEST(NonparametricE0, RowSubsetMatchesFullEvaluation) {
  const Sample s(fixtures::mixed(150, 2), {});
  const ProfileState st = ProfileFitter(s).fit(0.6);
  const NonparametricE0 e(s);
  const Eigen::VectorXd all = e.evaluate(E0Functional::inv_pi, st);
  const std::vector<std::size_t> rows{3, 0, 77};
  const Eigen::VectorXd sub = e.evaluate(E0Functional::inv_pi, st, rows);
  for (std::size_t k = 0; k < rows.size(); ++k)
    EXPECT_NEAR(sub[static_cast<Eigen::Index>(k)], all[static_cast<Eigen::Index>(rows[k])], 1e-13);
}

TEST(FractionalE0, MatchesDirectWeightedAverages) {
  const Dataset d = fixtures::mixed(120, 3);
  const Sample s(d, {});
  const OutcomeWorkingModel wm = fit_working_model(d, default_design(d));
  const FractionalE0 fi(s, wm, 40, 17);
  const double gamma = 0.7;
  const ProfileState st = ProfileFitter(s).fit(gamma);
  const E0Functional fs[] = {E0Functional::y, E0Functional::pi_y, E0Functional::inv_pi};
  const Eigen::MatrixXd many = fi.evaluate_many(fs, st);
  for (std::size_t i = 0; i < s.size(); i += 7) {
    const auto draws = fi.draws(i);
    double w = 0, ey = 0, epy = 0, einv = 0;
    for (double y : draws) {
      const double t = std::exp(gamma * y);
      const double p = st.pi_at(i, y);
      w += t;
      ey += t * y;
      epy += t * p * y;
      einv += t / p;
    }
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(many(r, 0), ey / w, 1e-10);
    EXPECT_NEAR(many(r, 1), epy / w, 1e-10);
    EXPECT_NEAR(many(r, 2), einv / w, 1e-8 * std::fabs(einv / w));
    for (int c = 0; c < 3; ++c)
      EXPECT_NEAR(fi.evaluate(fs[c], st)[r], many(r, c), 1e-12 * (1 + std::fabs(many(r, c))));
  }
}

TEST(FractionalE0, SameSeedSameDraws) {
  const Dataset d = fixtures::mixed(60, 4);
  const Sample s(d, {});
  const OutcomeWorkingModel wm = fit_working_model(d, default_design(d));
  const FractionalE0 a(s, wm, 10, 5), b(s, wm, 10, 5), c(s, wm, 10, 6);
  EXPECT_TRUE(std::equal(a.draws(9).begin(), a.draws(9).end(), b.draws(9).begin()));
  EXPECT_FALSE(std::equal(a.draws(9).begin(), a.draws(9).end(), c.draws(9).begin()));
  EXPECT_THROW(FractionalE0(s, wm, 0, 1), ConfigError);
}

TEST(AnalyticE0, ClosedForms) {
  const Dataset d = fixtures::mixed(200, 5);
  const Sample s(d, {});
  const OutcomeWorkingModel wm = fit_working_model(d, default_design(d));
  const AnalyticE0 an(s, wm);
  const double gamma = -0.4;
  const ProfileState st = ProfileFitter(s).fit(gamma);
  const Eigen::VectorXd ey = an.evaluate(E0Functional::y, st);
  const Eigen::VectorXd inv = an.evaluate(E0Functional::inv_pi, st);
  for (std::size_t i = 0; i < s.size(); i += 11) {
    const auto x = full_covariates(d[i]);
    const double mu = wm.mean(x);
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_NEAR(ey[r], mu + gamma * wm.sigma2, 1e-12);
    EXPECT_NEAR(inv[r], 1 + std::exp(-st.log_eg[r] + gamma * mu + 1.5 * gamma * gamma * wm.sigma2),
                1e-10);
  }
  EXPECT_THROW(an.evaluate(E0Functional::pi_y, st), ConfigError);
  EXPECT_THROW(an.log1m_pi(gamma, st, all_rows(s.size())), ConfigError);
}

TEST(FractionalE0, ApproachesAnalyticWithManyDraws) {
  const Dataset d = fixtures::mixed(40, 6);
  const Sample s(d, {});
  const OutcomeWorkingModel wm = fit_working_model(d, default_design(d));
  const FractionalE0 fi(s, wm, 20000, 8);
  const AnalyticE0 an(s, wm);
  const ProfileState st = ProfileFitter(s).fit(0.5);
  const Eigen::VectorXd a = an.evaluate(E0Functional::y, st);
  const Eigen::VectorXd f = fi.evaluate(E0Functional::y, st);
  const double se = std::sqrt(wm.sigma2 / 20000.0);
  for (Eigen::Index i = 0; i < a.size(); ++i) EXPECT_NEAR(f[i], a[i], 6 * se);
}

TEST(E0, Log1mPiAtRespondentsIsDirect) {
  const Sample s(fixtures::discrete(200, 7), {});
  const ProfileState st = ProfileFitter(s).fit(0.3);
  const NonparametricE0 e(s);
  const Eigen::VectorXd h = e.log1m_pi(0.3, st, all_rows(s.size()));
  EXPECT_EQ(h.size(), static_cast<Eigen::Index>(s.size()));
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    EXPECT_TRUE(std::isfinite(h[i]));
    EXPECT_LT(h[i], 0.0);
  }
}
