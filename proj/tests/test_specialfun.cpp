#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "eigmeans/specialfun.hpp"
#include "oracles.hpp"

using namespace eigmeans::specialfun;

namespace {

const BesselOrder kJ0 = BesselOrder::from_twice(0);
const BesselOrder kHalf = BesselOrder::from_twice(1);
const BesselOrder kOne = BesselOrder::from_twice(2);
const BesselOrder kThreeHalves = BesselOrder::from_twice(3);

double closed_j_half(double x) { return std::sqrt(2 / (std::numbers::pi * x)) * std::sin(x); }
double closed_y_half(double x) { return -std::sqrt(2 / (std::numbers::pi * x)) * std::cos(x); }

}  // namespace

TEST(BesselOrder, RejectsUnsupported) {
  EXPECT_THROW(BesselOrder::from_twice(4), std::invalid_argument);
  EXPECT_THROW(BesselOrder::for_dimension(6), std::invalid_argument);
  EXPECT_THROW(BesselOrder::for_dimension(1), std::invalid_argument);
  EXPECT_EQ(BesselOrder::for_dimension(3).twice(), 1);
  EXPECT_FALSE(BesselOrder::for_dimension(3).is_integer());
  EXPECT_DOUBLE_EQ(BesselOrder::for_dimension(5).value(), 1.5);
}

TEST(BesselJ, KnownValues) {
  EXPECT_EQ(bessel_j(kJ0, 0.0), 1.0);
  EXPECT_NEAR(bessel_j(kJ0, 1.0), 0.7651976865579666, 1e-12);
  EXPECT_NEAR(bessel_j(kHalf, std::numbers::pi / 2), 2 / std::numbers::pi, 1e-13);
  EXPECT_THROW(bessel_j(kJ0, -0.1), std::domain_error);
}

TEST(BesselJ, MatchesSeriesOracleUpTo12) {
  for (int twice = 0; twice <= 3; ++twice) {
    for (int i = 1; i <= 120; ++i) {
      const double x = 0.1 * i;
      const double ref = static_cast<double>(oracle::bessel_j_series(twice / 2.0L, x));
      const double got = bessel_j(BesselOrder::from_twice(twice), x);
      // relative where the value is not near a zero, absolute otherwise
      EXPECT_LE(std::abs(got - ref), 1e-12 * std::max(1.0, std::abs(ref)) + 2e-14) << twice << " " << x;
    }
  }
}

TEST(BesselJ, CrossoverContinuity) {
  for (int twice = 0; twice <= 3; ++twice) {
    const auto o = BesselOrder::from_twice(twice);
    for (double x : {11.5, 11.9, 12.0, 12.1, 13.0, 15.0, 20.0}) {
      const double series = static_cast<double>(oracle::bessel_j_series(twice / 2.0L, x, 120));
      EXPECT_NEAR(bessel_j(o, x), series, 1e-10) << twice << " " << x;
    }
  }
}

TEST(BesselY, KnownValues) {
  EXPECT_NEAR(bessel_y(kHalf, std::numbers::pi / 2), 0.0, 1e-15);
  EXPECT_NEAR(bessel_y(kJ0, 1.0), 0.0882569642156769579, 1e-12);
  for (double x : {1e-8, 1e-3, 0.1, 0.4, 0.49}) EXPECT_LT(bessel_y(kJ0, x), 0.0) << x;
  EXPECT_THROW(bessel_y(kJ0, 0.0), std::domain_error);
  EXPECT_THROW(bessel_y(kJ0, -1.0), std::domain_error);
}

TEST(BesselY, IntegerOrdersMatchLogSeriesOracle) {
  for (int i = 1; i <= 100; ++i) {
    const double x = 0.1 * i;
    EXPECT_NEAR(bessel_y(kJ0, x), static_cast<double>(oracle::y0(x)), 1e-12 * std::max(1.0L, std::abs(oracle::y0(x))));
    EXPECT_NEAR(bessel_y(kOne, x), static_cast<double>(oracle::y1(x)), 1e-12 * std::max(1.0L, std::abs(oracle::y1(x))));
  }
}

TEST(BesselY, WronskianIdentityAtOne) {
  // J1 Y0 - J0 Y1 = 2/(pi x)
  const double x = 1.0;
  const double w = bessel_j(kOne, x) * bessel_y(kJ0, x) - bessel_j(kJ0, x) * bessel_y(kOne, x);
  EXPECT_NEAR(w, 2 / (std::numbers::pi * x), 1e-14);
}

TEST(BesselHalfInteger, ClosedFormsOnGrid) {
  for (int i = 0; i <= 99; ++i) {
    const double x = 0.1 + 0.1 * i;
    const double a = std::sqrt(2 / (std::numbers::pi * x));
    EXPECT_NEAR(bessel_j(kHalf, x), closed_j_half(x), 1e-12 * a);
    EXPECT_NEAR(bessel_y(kHalf, x), closed_y_half(x), 1e-12 * a);
    EXPECT_NEAR(bessel_j(kThreeHalves, x), a * (std::sin(x) / x - std::cos(x)), 1e-12 * a);
    EXPECT_NEAR(bessel_y(kThreeHalves, x), -a * (std::cos(x) / x + std::sin(x)), 1e-12 * a * (1 + 1 / x));
  }
}

class FundamentalPairTest : public ::testing::TestWithParam<int> {};

TEST_P(FundamentalPairTest, ScaledWronskianConstant) {
  const int n = GetParam();
  const FundamentalPair<double> pair(n);
  for (int i = 0; i <= 300; ++i) {
    const double x = 0.01 * std::pow(1000.0, i / 300.0);
    const double scaled = std::pow(x, n - 1) * pair.wronskian(x);
    EXPECT_NEAR(scaled / (2 / std::numbers::pi), 1.0, 1e-8) << x;
  }
}

TEST_P(FundamentalPairTest, Y1SolvesRadialEquation) {
  const int n = GetParam();
  const FundamentalPair<double> pair(n);
  const double h = 1e-4;
  for (int i = 0; i <= 200; ++i) {
    const double x = 0.01 + (10.0 - 0.01) * i / 200;
    const double d2 = (-pair.dy1(x + 2 * h) + 8 * pair.dy1(x + h) - 8 * pair.dy1(x - h) + pair.dy1(x - 2 * h)) / (12 * h);
    EXPECT_LE(std::abs(d2 + (n - 1) / x * pair.dy1(x) + pair.y1(x)), 1e-8) << x;
  }
}

TEST_P(FundamentalPairTest, Y2SolvesRadialEquation) {
  // Absolute residual away from the singular point, relative residual close to it.
  const int n = GetParam();
  const FundamentalPair<double> pair(n);
  for (int i = 0; i <= 200; ++i) {
    const double x = 0.5 + 9.5 * i / 200;
    const double h = 1e-4;
    const double d2 = (-pair.dy2(x + 2 * h) + 8 * pair.dy2(x + h) - 8 * pair.dy2(x - h) + pair.dy2(x - 2 * h)) / (12 * h);
    EXPECT_LE(std::abs(d2 + (n - 1) / x * pair.dy2(x) + pair.y2(x)), 1e-8) << x;
  }
  for (int i = 0; i <= 200; ++i) {
    const double x = 0.01 * std::pow(1000.0, i / 200.0);
    const double h = 1e-4 * x;
    const double d2 = (-pair.dy2(x + 2 * h) + 8 * pair.dy2(x + h) - 8 * pair.dy2(x - h) + pair.dy2(x - 2 * h)) / (12 * h);
    const double terms = std::abs(d2) + std::abs((n - 1) / x * pair.dy2(x)) + std::abs(pair.y2(x));
    EXPECT_LE(std::abs(d2 + (n - 1) / x * pair.dy2(x) + pair.y2(x)) / terms, 1e-8) << x;
  }
}

TEST_P(FundamentalPairTest, FactoredQuotientsMatchDirectOnes) {
  const int n = GetParam();
  const FundamentalPair<double> pair(n);
  for (double x : {0.05, 0.3, 1.0, 4.0, 9.0}) {
    const double w = pair.wronskian(x);
    EXPECT_NEAR(pair.y1_over_wronskian(x), pair.y1(x) / w, 1e-10 * std::abs(pair.y1(x) / w) + 1e-15);
    EXPECT_NEAR(pair.y2_over_wronskian(x), pair.y2(x) / w, 1e-10 * std::abs(pair.y2(x) / w) + 1e-15);
    const double h = 1e-5 * x;
    EXPECT_NEAR(pair.d_y1_over_wronskian(x),
                (pair.y1_over_wronskian(x + h) - pair.y1_over_wronskian(x - h)) / (2 * h), 1e-6);
    EXPECT_NEAR(pair.d_y2_over_wronskian(x),
                (pair.y2_over_wronskian(x + h) - pair.y2_over_wronskian(x - h)) / (2 * h), 1e-6);
  }
  EXPECT_EQ(pair.y2_over_wronskian(0.0), 0.0);
}

INSTANTIATE_TEST_SUITE_P(Dimensions, FundamentalPairTest, ::testing::Values(2, 3, 4, 5));

TEST(FundamentalPair, Dimension2Examples) {
  const FundamentalPair<double> pair(2);
  for (double x : {0.1, 1.0, 5.0}) EXPECT_NEAR(x * pair.wronskian(x), 2 / std::numbers::pi, 1e-8);
  const double tiny = 1e-6;
  const double ratio = std::abs(pair.y2(tiny)) / std::abs(std::log(tiny));
  EXPECT_TRUE(std::isfinite(pair.y2(tiny)));
  EXPECT_GT(ratio, 0.5);
  EXPECT_LT(ratio, 2.0);
  EXPECT_THROW(pair.y2(0.0), std::domain_error);
  EXPECT_THROW(FundamentalPair<double>(7), std::invalid_argument);
}

TEST(FundamentalPair, Dimension3IsSincUpToConstant) {
  const FundamentalPair<double> pair(3);
  EXPECT_NEAR(pair.y1(std::numbers::pi) / pair.y1(std::numbers::pi / 2), 0.0, 1e-15);
  for (double x : {0.2, 1.0, 2.5, 7.0}) {
    EXPECT_NEAR(pair.y1(x), std::sqrt(2 / std::numbers::pi) * std::sin(x) / x, 1e-14);
  }
}

TEST(Legendre, Values) {
  for (int l : {0, 1, 7, 50, 500}) EXPECT_NEAR(legendre(l, 1.0), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(legendre(2, 0.0), -0.5);
  EXPECT_NEAR(legendre(10, 0.3), static_cast<double>(oracle::legendre_monomial(10, 0.3L)), 1e-12);
  for (int l = 0; l <= 12; ++l) {
    for (double t : {-0.9, -0.35, 0.0, 0.2, 0.77}) {
      EXPECT_NEAR(legendre(l, t), static_cast<double>(oracle::legendre_monomial(l, t)), 1e-12) << l << " " << t;
    }
  }
  EXPECT_THROW(legendre(3, 1.1), std::domain_error);
  EXPECT_THROW(legendre(-1, 0.5), std::invalid_argument);
}

TEST(Legendre, BoundedByOne) {
  for (int l = 0; l <= 500; l += 7) {
    for (int i = 0; i <= 400; ++i) {
      const double t = -1.0 + 2.0 * i / 400;
      EXPECT_LE(std::abs(legendre(l, t)), 1.0 + 1e-12);
    }
  }
}

TEST(V0Profile, Values) {
  for (int n = 2; n <= 5; ++n) EXPECT_NEAR(v0_profile(n, 0.0), 1.0, 1e-15);
  EXPECT_NEAR(v0_profile(2, 1.0), 0.7651976866, 1e-10);
  EXPECT_NEAR(v0_profile(3, std::numbers::pi), 0.0, 1e-15);
  for (double r : {0.3, 1.7, 4.2}) {
    EXPECT_NEAR(v0_profile(3, r), std::sin(r) / r, 1e-14);
    EXPECT_NEAR(v0_derivative(3, r), (r * std::cos(r) - std::sin(r)) / (r * r), 1e-14);
  }
  EXPECT_THROW(v0_profile(2, -1.0), std::domain_error);
}

TEST(V0Profile, SolvesItsIvp) {
  // Independent Taylor-series integration of v'' + ((n-1)/r) v' + v = 0:
  // v = sum a_m r^(2m), a_m = -a_{m-1} / (2m (2m + n - 2)).
  for (int n = 2; n <= 5; ++n) {
    for (int i = 0; i <= 50; ++i) {
      const long double r = 5.0L * i / 50;
      long double a = 1, sum = 1, pw = 1;
      for (int m = 1; m < 60; ++m) {
        a *= -1.0L / (2 * m * (2 * m + n - 2));
        pw *= r * r;
        sum += a * pw;
      }
      EXPECT_NEAR(v0_profile(n, static_cast<double>(r)), static_cast<double>(sum), 1e-8) << n << " " << r;
    }
  }
}
