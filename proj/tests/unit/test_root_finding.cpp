#include <gtest/gtest.h>

#include <cmath>

#include "semimnar/errors.hpp"
#include "semimnar/root_finding.hpp"

using namespace semimnar;

TEST(Brent, FindsCubicRoot) {
  auto f = [](double x) { return x * x * x - 2 * x - 5; };
  const RootResult r = brent_root(f, 2.0, 3.0);
  EXPECT_NEAR(r.x, 2.0945514815423265, 1e-9);
  EXPECT_LE(std::fabs(r.f), 1e-8);
  EXPECT_GT(r.iterations, 0);
}

TEST(Brent, EndpointRoot) {
  auto f = [](double x) { return x - 1.0; };
  EXPECT_DOUBLE_EQ(brent_root(f, 1.0, 4.0).x, 1.0);
}

TEST(Brent, NoSignChange) {
  auto f = [](double x) { return x * x + 1; };
  try {
    brent_root(f, -1.0, 1.0);
    FAIL();
  } catch (const NoSignChange& e) {
    EXPECT_DOUBLE_EQ(e.lo(), -1.0);
    EXPECT_DOUBLE_EQ(e.hi(), 1.0);
  }
}

TEST(Brent, JumpIsSolverFailure) {
  auto f = [](double x) { return x < 0.3 ? -1.0 : 1.0; };
  EXPECT_THROW(brent_root(f, 0.0, 1.0), SolverFailure);
}

TEST(Expit, StableAtExtremes) {
  EXPECT_DOUBLE_EQ(expit(0.0), 0.5);
  EXPECT_NEAR(expit(800.0), 1.0, 0.0);
  EXPECT_GT(expit(-700.0), 0.0);
  EXPECT_NEAR(log_expit(-800.0), -800.0, 1e-9);
  EXPECT_NEAR(log_expit(2.0), std::log(1.0 / (1.0 + std::exp(-2.0))), 1e-15);
}
