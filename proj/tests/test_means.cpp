#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "eigmeans/means.hpp"
#include "oracles.hpp"

using namespace eigmeans::manifold;
using namespace eigmeans::means;

namespace {

constexpr double kPi = std::numbers::pi;

double bessel0(double x) { return static_cast<double>(oracle::j0(x)); }

double legendre_oracle(int l, double t) { return static_cast<double>(oracle::legendre_monomial(l, t)); }

}  // namespace

TEST(SphericalMean, ConstantFunction) {
  for (const char* id : {"t2", "s2", "s3", "e2"}) {
    const auto m = make_manifold(id);
    std::mt19937_64 rng(1);
    const Point x = m.random_point(rng);
    for (double r : {0.01, 0.5, 1.4}) {
      EXPECT_NEAR(spherical_mean(m, [](const Point&) { return 2.5; }, x, r, 64), 2.5, 1e-13) << id;
    }
  }
}

TEST(SphericalMean, FlatMeanValueProperty) {
  const auto t2 = make_manifold("t2");
  const auto psi = eigenfunction(t2, Frequency{{3, 4}, 0.0});
  const Point x0 = flat_point(0.7, 1.9);
  EXPECT_NEAR(spherical_mean(t2, psi, x0, 0.1, 256), psi(x0) * bessel0(0.5), 1e-10);
}

TEST(SphericalMean, FlatMeanValueAcrossRandomFrequencies) {
  const auto t2 = make_manifold("t2");
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> comp(-8, 8);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    std::array<int, 2> k{};
    do {
      k = {comp(rng), comp(rng)};
    } while ((k[0] == 0 && k[1] == 0) || k[0] * k[0] + k[1] * k[1] > 144);
    const auto psi = eigenfunction(t2, Frequency{k, 2 * kPi * unit(rng)});
    const Point x = t2.random_point(rng);
    const double r = std::min(5.0 / psi.lambda(), 3.0) * unit(rng) + 1e-3;
    EXPECT_NEAR(spherical_mean(t2, psi, x, r, 512), psi(x) * bessel0(psi.lambda() * r), 1e-8);
  }
}

TEST(SphericalMean, ZonalAboutThePole) {
  const auto s2 = make_manifold("s2");
  for (int l : {0, 3, 10, 25}) {
    const auto psi = eigenfunction(s2, Zonal{l, std::nullopt});
    for (double r : {0.1, 0.8, 1.5}) {
      EXPECT_NEAR(spherical_mean(s2, psi, s2.north_pole(), r, 64), legendre_oracle(l, std::cos(r)), 1e-10);
    }
  }
  EXPECT_THROW(spherical_mean(s2, eigenfunction(s2, Zonal{1, std::nullopt}), s2.north_pole(), 0.0, 64),
               std::domain_error);
}

TEST(SphericalMean, OffCenterZonalFollowsFunkHecke) {
  // The mean of P_l about x is P_l(x . pole) P_l(cos r).
  const auto s2 = make_manifold("s2");
  const int l = 9;
  const auto psi = eigenfunction(s2, Zonal{l, std::nullopt});
  const Point x = s2_point(1.1, 0.3);
  for (double r : {0.2, 0.9}) {
    EXPECT_NEAR(spherical_mean(s2, psi, x, r, 256), psi(x) * legendre_oracle(l, std::cos(r)), 1e-12);
  }
}

TEST(SphericalMean, NodeDoublingConverges) {
  struct Case {
    const char* id;
    EigenSpec spec;
  };
  const std::vector<Case> cases{{"t2", Frequency{{7, -5}, 0.2}}, {"s2", Zonal{30, s2_point(0.4, 0.4)}}};
  for (const auto& c : cases) {
    const auto m = make_manifold(c.id);
    const auto psi = eigenfunction(m, c.spec);
    const double r_max = 1.2;
    const int nodes = static_cast<int>(std::ceil(4 * (psi.lambda() * r_max + 16)));
    std::mt19937_64 rng(9);
    const Point x = m.random_point(rng);
    for (double r : {0.3, 0.7, 1.2}) {
      EXPECT_NEAR(spherical_mean(m, psi, x, r, nodes), spherical_mean(m, psi, x, r, 2 * nodes), 1e-10) << c.id;
    }
  }
}

TEST(MeanProfile, SquaredZonalAboutPole) {
  const auto s2 = make_manifold("s2");
  const auto psi = eigenfunction(s2, Zonal{10, std::nullopt});
  const auto p = mean_profile(s2, psi, s2.north_pole(), 2.0, 1.0, 200, 64);
  ASSERT_EQ(p.radii.size(), 200u);
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    const double v = legendre_oracle(10, std::cos(p.radii[i]));
    EXPECT_NEAR(p.values[i], v * v, 1e-13);
    if (i > 0) {
      EXPECT_GT(p.radii[i], p.radii[i - 1]);
    }
  }
  EXPECT_NEAR(p.origin_value(), 1.0, 1e-6);
}

TEST(MeanProfile, FlatProfileIsBesselTimesValue) {
  const auto t2 = make_manifold("t2");
  const auto psi = eigenfunction(t2, Frequency{{2, 3}, 0.5});
  const Point x = flat_point(1.0, 4.0);
  const auto p = mean_profile(t2, psi, x, 1.0, 2.0, 40, 256);
  for (std::size_t i = 0; i < p.radii.size(); ++i) {
    EXPECT_NEAR(p.values[i], psi(x) * bessel0(psi.lambda() * p.radii[i]), 1e-12);
  }
  EXPECT_NEAR(p.origin_value(), psi(x), 1e-6);
}

TEST(MeanProfile, ConstantAndPowers) {
  const auto s3 = make_manifold("s3");
  const auto p = mean_profile(s3, [](const Point&) { return 3.0; }, s3.north_pole(), 2.0, 1.0, 10, 48);
  for (double v : p.values) EXPECT_NEAR(v, 9.0, 1e-12);
  const auto cube = mean_profile(s3, [](const Point&) { return -2.0; }, s3.north_pole(), 3.0, 1.0, 10, 48);
  for (double v : cube.values) EXPECT_NEAR(v, 8.0, 1e-12);
  const auto one = [](const Point&) { return 1.0; };
  EXPECT_THROW(mean_profile(s3, one, s3.north_pole(), 0.5, 1.0, 10, 48), std::invalid_argument);
  EXPECT_THROW(mean_profile(s3, one, s3.north_pole(), 1.0, kPi, 10, 48), std::domain_error);
  EXPECT_THROW(mean_profile(s3, one, s3.north_pole(), 1.0, 1.0, 4, 48), std::invalid_argument);
}

TEST(MeanProfile, OriginExtrapolationMatchesCenterPower) {
  std::mt19937_64 rng(4);
  for (const char* id : {"t2", "s2", "s3"}) {
    const auto m = make_manifold(id);
    const auto psi = m.id() == ManifoldId::t2 ? eigenfunction(m, Frequency{{4, 1}, 0.3})
                                              : eigenfunction(m, Zonal{6, std::nullopt});
    const Point x = m.random_point(rng);
    for (double q : {1.0, 2.0, 4.0}) {
      const auto p = mean_profile(m, psi, x, q, 0.5, 100, default_nodes(m, psi.lambda(), 0.5));
      EXPECT_NEAR(p.origin_value(), std::pow(std::abs(psi(x)), q) * (q == 1 && psi(x) < 0 ? -1 : 1), 1e-6) << id;
    }
  }
}

namespace {

double eigen_residual(const ModelManifold& m, const Eigenfunction& psi, const Point& x, double r_max, int grid) {
  const auto p = mean_profile(m, psi, x, 1.0, r_max, grid, default_nodes(m, psi.lambda(), r_max));
  return epd_residual(p, m.geometry(), psi.lambda(), EpdMode::eigen).max_abs();
}

}  // namespace

TEST(EpdResidual, EigenModeSecondOrder) {
  struct Case {
    const char* id;
    EigenSpec spec;
  };
  const std::vector<Case> cases{{"t2", Frequency{{3, 4}, 0.1}}, {"s2", Zonal{8, s2_point(0.5, 1.0)}},
                                {"s3", Zonal{5, s3_point(0.4, 1.0, 2.0)}}};
  for (const auto& c : cases) {
    const auto m = make_manifold(c.id);
    const auto psi = eigenfunction(m, c.spec);
    const Point x = m.id() == ManifoldId::t2 ? flat_point(0.3, 0.9) : m.north_pole();
    const double e1 = eigen_residual(m, psi, x, 1.0, 50);
    const double e2 = eigen_residual(m, psi, x, 1.0, 100);
    EXPECT_GE(std::log2(e1 / e2), 1.8) << c.id << " " << e1 << " " << e2;
  }
}

TEST(EpdResidual, ConstantEigenfunctionHasZeroResidual) {
  const auto t2 = make_manifold("t2");
  const auto one = eigenfunction(t2, Frequency{{0, 0}, 0.0});
  const auto p = mean_profile(t2, one, flat_point(1, 1), 1.0, 1.0, 20, 64);
  EXPECT_LE(epd_residual(p, t2.geometry(), 0.0, EpdMode::eigen).max_abs(), 1e-10);
  const auto sq = mean_profile(t2, one, flat_point(1, 1), 2.0, 1.0, 20, 64);
  EXPECT_LE(epd_residual(sq, t2.geometry(), 0.0, EpdMode::square).max_abs(), 1e-10);
}

TEST(EpdResidual, SquareModeInequalityOnSphere) {
  const auto s2 = make_manifold("s2");
  const auto psi = eigenfunction(s2, Zonal{20, std::nullopt});
  const double lambda = psi.lambda();
  const auto p = mean_profile(s2, psi, s2.north_pole(), 2.0, 1.0 / lambda, 200, 64);
  const auto res = epd_residual(p, s2.geometry(), lambda, EpdMode::square);
  EXPECT_GE(res.min(), -1e-6 * lambda * lambda * p.origin_value());
}

TEST(EpdResidual, SquareModeInequalityOnTorusCombination) {
  const auto t2 = make_manifold("t2");
  const auto psi = eigenfunction(t2, TrigCombination{{{1.0, {5, 0}, 0.0}, {0.7, {3, 4}, 1.0}, {0.4, {0, -5}, 2.0}}});
  const double lambda = psi.lambda();
  const auto p = mean_profile(t2, psi, flat_point(0.2, 0.3), 2.0, 1.0 / lambda, 200, 256);
  const auto res = epd_residual(p, t2.geometry(), lambda, EpdMode::square);
  EXPECT_GE(res.min(), -1e-6 * lambda * lambda * p.origin_value());
}

TEST(EpdResidual, RejectsBadGrids) {
  const auto t2 = make_manifold("t2");
  auto p = mean_profile(t2, [](const Point&) { return 1.0; }, flat_point(0, 0), 1.0, 1.0, 10, 64);
  p.radii[4] += 1e-3;
  EXPECT_THROW(epd_residual(p, t2.geometry(), 1.0, EpdMode::eigen), std::invalid_argument);
  p.radii.resize(4);
  p.values.resize(4);
  EXPECT_THROW(epd_residual(p, t2.geometry(), 1.0, EpdMode::eigen), std::invalid_argument);
}

TEST(DivergenceIdentity, FlatFrequency) {
  const auto t2 = make_manifold("t2");
  const auto psi = eigenfunction(t2, Frequency{{3, 4}, 0.2});
  const auto c = divergence_identity_check(t2, psi, flat_point(0.5, 0.5), 0.2, 256, 1e-3);
  EXPECT_LE(c.relative_error, 1e-4);
  // h(r) dI/dr from the closed form -lambda J1(lambda r) psi(x).
  const double r = 0.2;
  const double j1 = static_cast<double>(oracle::bessel_j_series(1, psi.lambda() * r));
  EXPECT_NEAR(c.rhs, -2 * kPi * r * psi.lambda() * j1 * psi(flat_point(0.5, 0.5)), 1e-5);
}

TEST(DivergenceIdentity, ConstantHasBothSidesZero) {
  const auto s2 = make_manifold("s2");
  const auto one = eigenfunction(s2, Zonal{0, std::nullopt});
  const auto c = divergence_identity_check(s2, one, s2.north_pole(), 0.5, 64, 1e-3);
  EXPECT_EQ(c.lhs, 0.0);
  EXPECT_NEAR(c.rhs, 0.0, 1e-10);
}

TEST(DivergenceIdentity, SphereConvergesAtSecondOrder) {
  const auto s2 = make_manifold("s2");
  const auto psi = eigenfunction(s2, Zonal{5, std::nullopt});
  const Point x = s2_point(0.6, 0.0);
  const double e1 = divergence_identity_check(s2, psi, x, 0.3, 256, 0.02).relative_error;
  const double e2 = divergence_identity_check(s2, psi, x, 0.3, 256, 0.01).relative_error;
  EXPECT_GE(std::log2(e1 / e2), 1.8) << e1 << " " << e2;
}

TEST(LocateMax, ZonalPeaksAtPole) {
  const auto s2 = make_manifold("s2");
  for (int l : {1, 4, 11}) {
    const auto psi = eigenfunction(s2, Zonal{l, std::nullopt});
    const auto best = locate_max(s2, psi, 64);
    EXPECT_NEAR(std::abs(best.point.c[2]), 1.0, 1e-8) << l;
    EXPECT_NEAR(best.value, 1.0, 1e-10);
  }
  const auto s3 = make_manifold("s3");
  const auto u = eigenfunction(s3, Zonal{3, std::nullopt});
  EXPECT_NEAR(locate_max(s3, u, 24).value, 1.0, 1e-8);
}

TEST(LocateMax, TorusFrequencyReachesOne) {
  const auto t2 = make_manifold("t2");
  const auto psi = eigenfunction(t2, Frequency{{3, -2}, 0.77});
  const auto best = locate_max(t2, psi, 64);
  EXPECT_NEAR(best.value, 1.0, 1e-10);
  EXPECT_TRUE(best.plateau);
}

TEST(LocateMax, MatchesDenseGridOracle) {
  const auto t2 = make_manifold("t2");
  auto f = [](const Point& p) { return std::cos(3 * p.c[0]) + 0.5 * std::cos(4 * p.c[1]) + 0.3 * std::sin(p.c[0] + 2 * p.c[1]); };
  double dense = 0;
  for (int i = 0; i < 512; ++i) {
    for (int j = 0; j < 512; ++j) dense = std::max(dense, std::abs(f(flat_point(2 * kPi * i / 512, 2 * kPi * j / 512))));
  }
  const auto best = locate_max(t2, f, 64);
  EXPECT_GE(best.value, dense - 1e-8);
  EXPECT_NEAR(std::abs(f(best.point)), best.value, 1e-15);
}
