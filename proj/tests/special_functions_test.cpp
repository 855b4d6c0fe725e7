#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "oracles.hpp"
#include "rootbarrier/special_functions.hpp"

using namespace rootbarrier;

TEST(HeatKernel, Examples) {
  EXPECT_NEAR(heat_kernel(1.0 / (2.0 * std::numbers::pi), 0.0), 1.0, 1e-15);
  EXPECT_NEAR(heat_kernel(1.0, 0.0), 0.3989422804014327, 1e-15);
  EXPECT_EQ(heat_kernel(2.0, 1.0), heat_kernel(2.0, -1.0));
}

TEST(HeatKernel, RejectsNonpositiveTime) {
  EXPECT_THROW(heat_kernel(0.0, 1.0), std::domain_error);
  EXPECT_THROW(heat_kernel(-1.0, 1.0), std::domain_error);
}

TEST(ExpectedLocalTime, Examples) {
  EXPECT_NEAR(expected_local_time(std::numbers::pi / 2.0, 0.0), 1.0, 1e-15);
  EXPECT_EQ(expected_local_time(0.0, 3.7), 0.0);
  EXPECT_NEAR(expected_local_time(1.0, 1.0), oracle::local_time_quadrature(1.0, 1.0), 1e-10);
  // high-precision reference
  EXPECT_NEAR(expected_local_time(1.0, 1.0), 0.16663094117537260, 1e-15);
  EXPECT_NEAR(expected_local_time(0.5, 0.3), 0.31421848264721976, 1e-15);
}

TEST(ExpectedLocalTime, RejectsNegativeTime) {
  EXPECT_THROW(expected_local_time(-1e-300, 0.0), std::domain_error);
  EXPECT_THROW(expected_local_time(std::nan(""), 0.0), std::domain_error);
}

TEST(ExpectedLocalTime, MatchesTimeIntegralOfHeatKernel) {
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    for (int i = 0; i < 50; ++i) {
      const double x = -3.0 + 6.0 * i / 49.0;
      EXPECT_NEAR(expected_local_time(t, x), oracle::local_time_quadrature(t, x), 1e-9) << t << " " << x;
    }
  }
}

TEST(ExpectedLocalTime, MonotoneInTimeAndEven) {
  for (double x : {-2.0, -0.4, 0.0, 0.1, 1.3}) {
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
      const double t = 0.02 * i;
      const double g = expected_local_time(t, x);
      EXPECT_GE(g, prev);
      EXPECT_EQ(g, expected_local_time(t, -x));
      prev = g;
    }
  }
}

TEST(ExpectedLocalTime, VanishesAsTimeShrinks) {
  EXPECT_LE(expected_local_time(1e-12, 1.0), 1e-6);
  EXPECT_GE(expected_local_time(1e-12, 1.0), 0.0);
}

TEST(ExpectedAbsGaussian, ClosedFormAgainstQuadrature) {
  for (double t : {0.25, 1.0}) {
    for (double x : {-1.0, 0.0, 0.6}) {
      auto f = [&](double z) { return std::abs(x + std::sqrt(t) * z) * oracle::heat(1.0, z); };
      const double q = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, -12.0, 12.0, 15, 1e-13);
      EXPECT_NEAR(expected_abs_gaussian(t, x), q, 1e-10);
    }
  }
  EXPECT_EQ(expected_abs_gaussian(0.0, -2.5), 2.5);
}
