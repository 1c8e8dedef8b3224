#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "semimnar/errors.hpp"
#include "semimnar/smoothing.hpp"

using namespace semimnar;

TEST(CellMean, AveragesPerLevel) {
  const std::vector<CellPoint> pts{{0, 1.0}, {0, 3.0}, {1, 10.0}, {2, -1.0}, {2, 1.0}, {2, 3.0}};
  const CellMean m(pts);
  EXPECT_DOUBLE_EQ(m.evaluate(0), 2.0);
  EXPECT_DOUBLE_EQ(m.evaluate(1), 10.0);
  EXPECT_DOUBLE_EQ(m.evaluate(2), 1.0);
  EXPECT_EQ(m.count(2), 3u);
}

TEST(CellMean, EmptyCellNamesTheCode) {
  const std::vector<CellPoint> pts{{0, 1.0}, {1, 2.0}};
  const CellMean m(pts);
  try {
    m.evaluate(7);
    FAIL() << "expected EmptyCell";
  } catch (const EmptyCell& e) {
    EXPECT_NE(e.where().find('7'), std::string::npos);
  }
}

TEST(Bandwidth, MustBePositive) {
  EXPECT_THROW((void)Bandwidth(0.0), ConfigError);
  EXPECT_THROW((void)Bandwidth(-1.0), ConfigError);
  EXPECT_THROW((void)Bandwidth(INFINITY), ConfigError);
  EXPECT_DOUBLE_EQ(Bandwidth(0.3).value(), 0.3);
}

TEST(KernelMean, MatchesHandComputedWeights) {
  std::vector<KernelPoint> pts{{{0.0}, 1.0}, {{1.0}, 2.0}, {{3.0}, 5.0}};
  const Smoother s = fit_kernel_mean(pts, Bandwidth(1.0));
  const double x0 = 0.5;
  double num = 0, den = 0;
  for (const auto& p : pts) {
    const double w = std::exp(-0.5 * (x0 - p.x[0]) * (x0 - p.x[0]));
    num += w * p.z;
    den += w;
  }
  const double at[] = {x0};
  EXPECT_NEAR(s.evaluate(at), num / den, 1e-14);
  EXPECT_FALSE(s.is_cell());
}

TEST(KernelMean, ConstantResponseIsReproduced) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<KernelPoint> pts;
  for (int i = 0; i < 50; ++i) pts.push_back({{z(rng), z(rng)}, 4.25});
  const Smoother s = fit_kernel_mean(pts, Bandwidth(0.7), KernelId::epanechnikov);
  const double at[] = {0.1, -0.2};
  EXPECT_NEAR(s.evaluate(at), 4.25, 1e-12);
}

TEST(KernelMean, CompactKernelFarAwayIsDegenerate) {
  std::vector<KernelPoint> pts{{{0.0}, 1.0}, {{0.1}, 2.0}};
  const Smoother s = fit_kernel_mean(pts, Bandwidth(0.5), KernelId::epanechnikov);
  const double at[] = {10.0};
  EXPECT_THROW(s.evaluate(at), DegenerateWindow);
}

TEST(Kernel, ParseAndWeights) {
  EXPECT_EQ(parse_kernel("gaussian"), KernelId::gaussian);
  EXPECT_EQ(parse_kernel("epanechnikov"), KernelId::epanechnikov);
  EXPECT_THROW(parse_kernel("box"), ConfigError);
  EXPECT_DOUBLE_EQ(kernel_weight(KernelId::gaussian, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(kernel_weight(KernelId::epanechnikov, 0.25), 0.75);
  EXPECT_DOUBLE_EQ(kernel_weight(KernelId::epanechnikov, 1.5), 0.0);
}

TEST(RuleOfThumb, OneDimensionalSilverman) {
  std::vector<std::vector<double>> x;
  for (int i = 0; i < 100; ++i) x.push_back({static_cast<double>(i)});
  double mean = 49.5, ss = 0;
  for (const auto& p : x) ss += (p[0] - mean) * (p[0] - mean);
  const double sd = std::sqrt(ss / 99.0);
  EXPECT_NEAR(rule_of_thumb_bandwidth(x), 1.06 * sd * std::pow(100.0, -0.2), 1e-12);
}

TEST(RuleOfThumb, NoSpreadGivesZero) {
  std::vector<std::vector<double>> x(20, {1.0, 2.0});
  EXPECT_EQ(rule_of_thumb_bandwidth(x), 0.0);
}

TEST(CrossValidation, IdenticalPointsFail) {
  std::vector<std::vector<double>> x(10, {2.0});
  std::vector<double> z(10, 1.0);
  EXPECT_THROW(select_bandwidth_cv(x, z), BandwidthSelectionFailed);
}

TEST(CrossValidation, PicksGridMinimumWithSmallestTie) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  std::normal_distribution<double> e(0, 0.2);
  std::vector<std::vector<double>> x;
  std::vector<double> z;
  for (int i = 0; i < 150; ++i) {
    const double v = u(rng);
    x.push_back({v});
    z.push_back(std::sin(2 * v) + e(rng));
  }
  const auto curve = loo_cv_curve(x, z);
  ASSERT_EQ(curve.size(), 25u);
  double best_h = 0, best = INFINITY;
  for (const auto& [h, cv] : curve)
    if (std::isfinite(cv) && cv < best) {
      best = cv;
      best_h = h;
    }
  EXPECT_DOUBLE_EQ(select_bandwidth_cv(x, z).value(), best_h);
  // interior optimum for a smooth signal with noise
  EXPECT_GT(best_h, curve.front().first);
  EXPECT_LT(best_h, curve.back().first);
}

TEST(CrossValidation, TooFewPoints) {
  std::vector<std::vector<double>> x(5, {1.0});
  std::vector<double> z(5, 1.0);
  EXPECT_THROW(select_bandwidth_cv(x, z), DataError);
}

TEST(ConditionalSmoother, DiscreteStrataSumExactly) {
  std::vector<std::vector<double>> pts{{0, 1}, {0, 1}, {1, 1}, {0, 0}, {1, 1}};
  const ConditionalSmoother sm(pts, {VariableKind::discrete({0, 1}), VariableKind::discrete({0, 1})},
                               std::nullopt);
  EXPECT_TRUE(sm.purely_discrete());
  EXPECT_EQ(sm.num_strata(), 3u);
  Eigen::VectorXd v(5);
  v << 1, 2, 3, 4, 5;
  const Eigen::VectorXd s = sm.sums(v);
  EXPECT_DOUBLE_EQ(s[0], 3);
  EXPECT_DOUBLE_EQ(s[1], 3);
  EXPECT_DOUBLE_EQ(s[2], 8);
  EXPECT_DOUBLE_EQ(s[3], 4);
  EXPECT_DOUBLE_EQ(s[4], 8);
}

TEST(ConditionalSmoother, MixedKindsMatchDirectSum) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({static_cast<double>(i % 2), z(rng)});
  const double h = 0.4;
  const ConditionalSmoother sm(pts, {VariableKind::discrete({0, 1}), VariableKind::continuous()},
                               Bandwidth(h));
  Eigen::VectorXd v = Eigen::VectorXd::LinSpaced(40, -1, 1);
  const Eigen::VectorXd s = sm.sums(v);
  for (int i = 0; i < 40; ++i) {
    double direct = 0;
    for (int j = 0; j < 40; ++j) {
      if (pts[i][0] != pts[j][0]) continue;
      const double u = (pts[i][1] - pts[j][1]) / h;
      direct += std::exp(-0.5 * u * u) * v[j];
    }
    EXPECT_NEAR(s[i], direct, 1e-12);
  }
  const double at[] = {1.0, 0.3};
  double direct = 0;
  for (int j = 0; j < 40; ++j)
    if (pts[j][0] == 1.0) direct += std::exp(-0.5 * std::pow((0.3 - pts[j][1]) / h, 2)) * v[j];
  EXPECT_NEAR(sm.sum_at(at, v), direct, 1e-12);
}

TEST(ConditionalSmoother, ContinuousNeedsBandwidth) {
  std::vector<std::vector<double>> pts{{0.1}, {0.2}};
  EXPECT_THROW(ConditionalSmoother(pts, {VariableKind::continuous()}, std::nullopt), ConfigError);
}

TEST(ConditionalSmoother, EmptyMassIsReported) {
  std::vector<std::vector<double>> pts{{0}, {0}, {1}};
  const ConditionalSmoother sm(pts, {VariableKind::discrete({0, 1})}, std::nullopt, KernelId::gaussian,
                               {"x1"});
  Eigen::VectorXd mass(3);
  mass << 1, 1, 0;
  EXPECT_THROW(sm.check_mass(sm.sums(mass)), EmptyCell);
  try {
    sm.check_mass(sm.sums(mass));
  } catch (const EmptyCell& e) {
    EXPECT_NE(e.where().find("x1"), std::string::npos);
  }
}
