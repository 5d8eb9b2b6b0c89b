#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "eigmeans/manifold.hpp"
#include "eigmeans/quadrature.hpp"
#include "oracles.hpp"

using namespace eigmeans::manifold;

namespace {

constexpr double kPi = std::numbers::pi;

double weight_sum(const GeodesicSphereQuadrature& q) {
  double s = 0;
  for (double w : q.weights) s += w;
  return s;
}

// Ball volume from the sphere quadrature: integrate the weight sums over radius.
double ball_volume_by_shells(const ModelManifold& m, const Point& c, double r) {
  const auto gl = eigmeans::quad::gauss_legendre<double>(40);
  double s = 0;
  for (int i = 0; i < 40; ++i) {
    const double t = r / 2 * (gl.nodes[i] + 1);
    s += r / 2 * gl.weights[i] * weight_sum(geodesic_sphere(m, c, t, 64));
  }
  return s;
}

}  // namespace

TEST(MakeManifold, Catalog) {
  EXPECT_EQ(make_manifold("t2").dimension(), 2);
  EXPECT_EQ(make_manifold("s3").dimension(), 3);
  EXPECT_THROW(make_manifold("h2"), std::invalid_argument);
  EXPECT_DOUBLE_EQ(make_manifold("s2").injectivity_radius(), kPi);
  EXPECT_DOUBLE_EQ(make_manifold("t2").injectivity_radius(), kPi);
  EXPECT_DOUBLE_EQ(make_manifold("s2").total_volume(), 4 * kPi);
  EXPECT_DOUBLE_EQ(make_manifold("s3").total_volume(), 2 * kPi * kPi);
  EXPECT_FALSE(make_manifold("e2").is_compact());
  EXPECT_DOUBLE_EQ(make_manifold("s3").geometry().mean_radius_cap(), kPi / 2);
}

TEST(VolumeGeometry, FlatTorusHasNoCorrection) {
  const auto gm = make_manifold("t2");
  const auto& g = gm.geometry();
  for (double r : {0.01, 0.5, 1.0, 3.0}) {
    EXPECT_EQ(g.c(r), 0.0);
    EXPECT_DOUBLE_EQ(g.h(r), 2 * kPi * r);
    EXPECT_DOUBLE_EQ(g.g(r), 1 / r);
    EXPECT_EQ(correction_k(make_manifold("t2"), r), 0.0);
  }
  EXPECT_EQ(g.h(0.0), 0.0);
}

TEST(VolumeGeometry, SphereLogDerivativeMatchesFiniteDifference) {
  const auto gm = make_manifold("s2");
  const auto& g = gm.geometry();
  const double r = 0.5, step = 1e-5;
  const double fd = (std::log(g.h(r + step)) - std::log(g.h(r - step))) / (2 * step);
  EXPECT_NEAR(g.g(r), fd, 1e-9);
  EXPECT_NEAR(g.g(r), 1.8305, 1e-4);
  const auto g3m = make_manifold("s3");
  const auto& g3 = g3m.geometry();
  EXPECT_NEAR(g3.h(0.7), 4 * kPi * std::sin(0.7) * std::sin(0.7), 1e-14);
  const double fd3 = (std::log(g3.h(0.7 + step)) - std::log(g3.h(0.7 - step))) / (2 * step);
  EXPECT_NEAR(g3.g(0.7), fd3, 1e-9);
}

TEST(VolumeGeometry, BallVolumeMatchesIntegratedSurfaceMeasure) {
  const auto gm = make_manifold("s2");
  const auto& g = gm.geometry();
  const auto gl = eigmeans::quad::gauss_legendre<double>(20);
  double integral = 0;
  for (int i = 0; i < 20; ++i) integral += 0.5 * gl.weights[i] * g.h(0.5 * (gl.nodes[i] + 1));
  EXPECT_NEAR(g.ball_volume(1.0), integral, 1e-8);
  EXPECT_NEAR(g.ball_volume(1.0), 2 * kPi * (1 - std::cos(1.0)), 1e-14);
}

TEST(VolumeGeometry, CorrectionVanishesLinearly) {
  for (const char* id : {"t2", "s2", "s3", "e2"}) {
    const auto gm = make_manifold(id);
  const auto& g = gm.geometry();
    for (int i = 1; i <= 100; ++i) {
      const double r = 0.001 * i;
      EXPECT_LE(std::abs(g.c(r)), r) << id << " " << r;
    }
  }
}

TEST(VolumeGeometry, CorrectionMatchesTaylorOracle) {
  const auto s2 = make_manifold("s2");
  const auto s3 = make_manifold("s3");
  const double ref = -static_cast<double>(oracle::cot_minus_inverse_taylor(0.3L));
  EXPECT_NEAR(correction_k(s2, 0.3), ref, 1e-10);
  EXPECT_NEAR(correction_k(s2, 0.3), 1 / 0.3 - 1 / std::tan(0.3), 1e-14);
  EXPECT_NEAR(correction_k(s3, 0.3), 2 * ref, 2e-10);
  for (double r : {1e-2, 1e-4, 1e-6}) EXPECT_NEAR(correction_k(s2, r) / r, 1.0 / 3, r);
  // Both branches of the evaluation agree across the switch at r = 0.5.
  for (double r : {0.45, 0.4999, 0.5, 0.5001, 0.55}) {
    EXPECT_NEAR(s2.geometry().c(r), 1 / std::tan(r) - 1 / r, 1e-14);
  }
  EXPECT_THROW(correction_k(s2, 0.0), std::domain_error);
  EXPECT_THROW(correction_k(s2, kPi), std::domain_error);
  EXPECT_EQ(s2.geometry().correction_k(0.0), 0.0);
}

TEST(VolumeGeometry, TaylorCoefficientsReproduceCorrection) {
  const auto g = VolumeGeometry<double>::round_sphere(3);
  const auto t = g.correction_taylor(41);
  for (double r : {0.1, 0.8, 1.5}) {
    double s = 0, pw = 1;
    for (double a : t) {
      s += a * pw;
      pw *= r;
    }
    EXPECT_NEAR(s, g.c(r), 1e-12) << r;
  }
  EXPECT_NEAR(t[1], -2.0 / 3, 1e-16);
  EXPECT_EQ(t[0], 0.0);
  EXPECT_EQ(t[2], 0.0);
}

TEST(ModelManifold, BallVolumeIndependentOfCenter) {
  std::mt19937_64 rng(7);
  for (const char* id : {"t2", "s2"}) {
    const auto m = make_manifold(id);
    const double ref = m.geometry().ball_volume(1.2);
    for (int i = 0; i < 5; ++i) {
      const Point c = m.random_point(rng);
      EXPECT_NEAR(ball_volume_by_shells(m, c, 1.2), ref, 1e-10 * ref) << id;
      EXPECT_NEAR(weight_sum(geodesic_sphere(m, c, 0.9, 32)), m.geometry().h(0.9), 1e-12);
    }
  }
}

TEST(ModelManifold, ExpMapAndDistance) {
  std::mt19937_64 rng(11);
  for (const char* id : {"t2", "s2", "s3", "e2"}) {
    const auto m = make_manifold(id);
    for (int i = 0; i < 10; ++i) {
      const Point p = m.random_point(rng);
      const auto frame = m.tangent_frame(p);
      ASSERT_EQ(static_cast<int>(frame.size()), m.dimension());
      for (std::size_t a = 0; a < frame.size(); ++a) {
        EXPECT_NEAR(dot(frame[a], p.c) * (m.is_sphere() ? 1 : 0), 0.0, 1e-12);
        for (std::size_t b = 0; b < frame.size(); ++b) EXPECT_NEAR(dot(frame[a], frame[b]), a == b ? 1.0 : 0.0, 1e-12);
      }
      Vec v{};
      for (int k = 0; k < 4; ++k) v[k] = 0.8 * frame[0][k];
      EXPECT_NEAR(m.distance(p, m.exp_map(p, v)), 0.8, 1e-12) << id;
    }
  }
}

TEST(ModelManifold, TorusDistanceWraps) {
  const auto m = make_manifold("t2");
  EXPECT_NEAR(m.distance(flat_point(0.1, 0), flat_point(2 * kPi - 0.1, 0)), 0.2, 1e-14);
  const Point p = m.normalize(flat_point(-0.5, 7.0));
  EXPECT_NEAR(p.c[0], 2 * kPi - 0.5, 1e-14);
  EXPECT_NEAR(p.c[1], 7.0 - 2 * kPi, 1e-14);
}

TEST(Eigenfunction, TorusFrequency) {
  const auto m = make_manifold("t2");
  const auto psi = eigenfunction(m, Frequency{{3, 4}, 0.0});
  EXPECT_DOUBLE_EQ(psi.lambda(), 5.0);
  EXPECT_EQ(psi.family(), "freq");
  EXPECT_EQ(psi.index_label(), "3:4");
  EXPECT_NEAR(psi(flat_point(0.3, 0.2)), std::cos(3 * 0.3 + 4 * 0.2), 1e-15);
  const auto constant = eigenfunction(m, Frequency{{0, 0}, 0.0});
  EXPECT_TRUE(constant.is_constant());
  EXPECT_THROW(eigenfunction(make_manifold("s2"), Frequency{{1, 0}, 0.0}), std::invalid_argument);
  EXPECT_THROW(eigenfunction(m, TrigCombination{{{1, {3, 4}, 0}, {1, {1, 0}, 0}}}), std::invalid_argument);
  EXPECT_THROW(eigenfunction(m, TrigCombination{}), std::invalid_argument);
}

TEST(Eigenfunction, SphereZonal) {
  const auto s2 = make_manifold("s2");
  const auto p2 = eigenfunction(s2, Zonal{2, std::nullopt});
  EXPECT_NEAR(p2.lambda() * p2.lambda(), 6.0, 1e-14);
  EXPECT_DOUBLE_EQ(p2(s2.north_pole()), 1.0);
  EXPECT_NEAR(p2(s2_point(1.0, 0.4)), 1.5 * std::cos(1.0) * std::cos(1.0) - 0.5, 1e-15);
  EXPECT_EQ(p2.family(), "zonal");
  EXPECT_EQ(p2.index_label(), "2");
  EXPECT_THROW(eigenfunction(s2, Zonal{-1, std::nullopt}), std::invalid_argument);
  EXPECT_THROW(eigenfunction(make_manifold("t2"), Zonal{1, std::nullopt}), std::invalid_argument);

  const auto s3 = make_manifold("s3");
  const auto u1 = eigenfunction(s3, Zonal{1, std::nullopt});
  EXPECT_NEAR(u1.lambda() * u1.lambda(), 3.0, 1e-14);
  for (double chi : {0.1, 0.7, 1.9, 3.0}) {
    EXPECT_NEAR(u1(s3_point(chi, 0.5, 0.2)), std::cos(chi), 1e-14);
    const auto u4 = eigenfunction(s3, Zonal{4, std::nullopt});
    EXPECT_NEAR(u4(s3_point(chi, 1.1, 2.0)), std::sin(5 * chi) / (5 * std::sin(chi)), 1e-13);
  }
}

TEST(Eigenfunction, RadialBesselOnPlane) {
  const auto e2 = make_manifold("e2");
  const auto psi = eigenfunction(e2, Radial{3.0, flat_point(0.5, -0.2)});
  EXPECT_EQ(psi.family(), "zonal");
  EXPECT_NEAR(psi(flat_point(0.5, 0.8)), static_cast<double>(oracle::j0(3.0L)), 1e-13);
  EXPECT_THROW(l2_norm(e2, psi), std::invalid_argument);
}

namespace {

// Largest |Delta psi + lambda^2 psi| over fixed random points at the given step.
double eigen_residual(const ModelManifold& m, const Eigenfunction& psi, double step) {
  std::mt19937_64 rng(3);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    const Point p = m.random_point(rng);
    const double lap = discrete_laplacian(m, psi, p, step);
    worst = std::max(worst, std::abs(lap + psi.lambda() * psi.lambda() * psi(p)));
  }
  return worst;
}

}  // namespace

TEST(Eigenfunction, DiscreteLaplacianConvergesAtSecondOrder) {
  struct Case {
    const char* id;
    EigenSpec spec;
  };
  const std::vector<Case> cases{
      {"t2", Frequency{{3, 4}, 0.3}},
      {"t2", TrigCombination{{{1.0, {5, 0}, 0.0}, {-0.5, {3, 4}, 1.0}, {2.0, {0, 5}, 0.2}}}},
      {"s2", Zonal{2, std::nullopt}},
      {"s2", Zonal{7, s2_point(0.4, 1.0)}},
      {"s3", Zonal{1, std::nullopt}},
      {"s3", Zonal{5, std::nullopt}},
      {"e2", Radial{4.0, flat_point(0.1, 0.1)}},
  };
  for (const auto& c : cases) {
    const auto m = make_manifold(c.id);
    const auto psi = eigenfunction(m, c.spec);
    const double e1 = eigen_residual(m, psi, 0.02);
    const double e2 = eigen_residual(m, psi, 0.01);
    EXPECT_GE(std::log2(e1 / e2), 1.8) << c.id << " " << psi.index_label();
  }
}

TEST(GeodesicSphere, WeightsAndDistances) {
  const auto t2 = make_manifold("t2");
  EXPECT_NEAR(weight_sum(geodesic_sphere(t2, flat_point(1, 1), 0.1, 32)), 2 * kPi * 0.1, 1e-14);
  const auto s2 = make_manifold("s2");
  EXPECT_NEAR(weight_sum(geodesic_sphere(s2, s2.north_pole(), 1.0, 64)), 2 * kPi * std::sin(1.0), 1e-12);
  const auto s3 = make_manifold("s3");
  for (const char* id : {"t2", "s2", "s3", "e2"}) {
    const auto m = make_manifold(id);
    std::mt19937_64 rng(5);
    const Point c = m.random_point(rng);
    for (double r : {0.05, 0.7, 1.5}) {
      const auto q = geodesic_sphere(m, c, r, 48);
      EXPECT_NEAR(weight_sum(q), m.geometry().h(r), 1e-10 * m.geometry().h(r));
      for (const auto& p : q.nodes) EXPECT_NEAR(m.distance(q.center, p), r, 1e-10);
      for (double w : q.weights) EXPECT_GT(w, 0.0);
    }
  }
  EXPECT_THROW(geodesic_sphere(s2, s2.north_pole(), 0.0, 32), std::domain_error);
  EXPECT_THROW(geodesic_sphere(s2, s2.north_pole(), kPi, 32), std::domain_error);
  EXPECT_THROW(geodesic_sphere(s2, s2.north_pole(), 1.0, 8), std::invalid_argument);
  EXPECT_EQ(geodesic_sphere(s3, s3.north_pole(), 1.0, 48).nodes.size(), 48u * 24u);
}

TEST(GeodesicSphere, TorusTranslationInvariance) {
  const auto t2 = make_manifold("t2");
  auto a = geodesic_sphere(t2, flat_point(0.3, 0.4), 0.5, 40).weights;
  auto b = geodesic_sphere(t2, flat_point(5.0, 2.0), 0.5, 40).weights;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  EXPECT_EQ(a, b);
}

TEST(GeodesicSphere, TrapezoidIntegratesLowModesExactly) {
  const auto t2 = make_manifold("t2");
  const int m = 32;
  const auto q = geodesic_sphere(t2, flat_point(1.0, 2.0), 0.4, m);
  for (int j = 0; j < m / 2; ++j) {
    double s = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
      const double phi = std::atan2(std::remainder(q.nodes[i].c[1] - 2.0, 2 * kPi), std::remainder(q.nodes[i].c[0] - 1.0, 2 * kPi));
      s += q.weights[i] * std::cos(j * phi);
    }
    EXPECT_NEAR(s, j == 0 ? t2.geometry().h(0.4) : 0.0, 1e-12) << j;
  }
}

TEST(GeodesicSphere, S3ZonalRestrictionMatchesClosedForm) {
  // The mean of U_l(cos chi)/(l+1) over the sphere of radius r about the pole is its value there;
  // about an off-pole center the mean is psi(center) * U_l(cos r)/(l+1) (Funk-Hecke).
  const auto s3 = make_manifold("s3");
  const int l = 6;
  const auto psi = eigenfunction(s3, Zonal{l, std::nullopt});
  const Point c = s3_point(0.8, 1.0, 0.3);
  for (double r : {0.2, 0.9, 1.4}) {
    const auto q = geodesic_sphere(s3, c, r, 48);
    double s = 0;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) s += q.weights[i] * psi(q.nodes[i]);
    const double mean = s / s3.geometry().h(r);
    const double expected = psi(c) * std::sin((l + 1) * r) / ((l + 1) * std::sin(r));
    EXPECT_NEAR(mean, expected, 1e-12) << r;
  }
}

TEST(L2Norm, ClosedFormsAgreeWithQuadrature) {
  const auto s2 = make_manifold("s2");
  const auto p3 = eigenfunction(s2, Zonal{3, std::nullopt});
  EXPECT_NEAR(l2_norm(s2, p3), std::sqrt(4 * kPi / 7), 1e-14);
  EXPECT_NEAR(l2_norm(s2, p3, 24), l2_norm(s2, p3), 1e-8);
  EXPECT_NEAR(l2_norm(s2, [](const Point&) { return 1.0; }, 8), std::sqrt(4 * kPi), 1e-12);

  const auto t2 = make_manifold("t2");
  const auto f = eigenfunction(t2, Frequency{{2, -1}, 0.4});
  EXPECT_NEAR(l2_norm(t2, f), std::sqrt(2.0) * kPi, 1e-14);
  EXPECT_NEAR(l2_norm(t2, f, 32), l2_norm(t2, f), 1e-10);
  const auto combo = eigenfunction(t2, TrigCombination{{{1.0, {3, 4}, 0.0}, {2.0, {-3, -4}, 0.5}, {0.5, {5, 0}, 0.0}}});
  EXPECT_NEAR(l2_norm(t2, combo, 64), l2_norm(t2, combo), 1e-10);

  const auto s3 = make_manifold("s3");
  const auto u3 = eigenfunction(s3, Zonal{3, s3_point(0.5, 0.5, 0.5)});
  EXPECT_NEAR(l2_norm(s3, u3, 16), l2_norm(s3, u3), 1e-8);
  EXPECT_THROW(l2_norm(make_manifold("e2"), [](const Point&) { return 1.0; }, 8), std::invalid_argument);
}
