#pragma once

// Spherical means over geodesic spheres, the Euler-Poisson-Darboux residual,
// the divergence identity behind it, and location of max |f|.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "eigmeans/manifold.hpp"

namespace eigmeans::means {

using manifold::Eigenfunction;
using manifold::ManifoldId;
using manifold::ModelManifold;
using manifold::Point;
using manifold::Vec;

/// Default node count for means out to radius r_max: max(256, 8 ceil(lambda r_max)).
/// On s3 the count is the azimuthal size of the 2D direction grid, default 48.
inline int default_nodes(const ModelManifold& m, double lambda, double r_max) {
  const int resolve = 8 * static_cast<int>(std::ceil(lambda * r_max));
  return std::max(m.id() == ManifoldId::s3 ? 48 : 256, resolve);
}

/// Average of f over the geodesic sphere of radius r about x.
template <class F>
double spherical_mean(const ModelManifold& m, const F& f, const Point& x, double r, int nodes) {
  const auto q = manifold::geodesic_sphere(m, x, r, nodes);
  double num = 0;
  double den = 0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    num += q.weights[i] * f(q.nodes[i]);
    den += q.weights[i];
  }
  return num / den;
}

struct MeanProfile {
  ManifoldId manifold{};
  Point center;
  double power = 1;
  std::vector<double> radii;   // r_i = i * step, i = 1..N
  std::vector<double> values;  // I(center, r_i)
  int node_count = 0;

  double step() const { return radii.front(); }
  /// I(center, 0) by even Richardson extrapolation from the first three radii.
  double origin_value() const { return 1.5 * values[0] - 0.6 * values[1] + 0.1 * values[2]; }
};

/// Spherical means of |f|^q (f itself when q = 1) on the uniform grid
/// r_max/N, 2 r_max/N, ..., r_max.
template <class F>
MeanProfile mean_profile(const ModelManifold& m, const F& f, const Point& x, double q, double r_max, int grid_size,
                         int nodes) {
  if (!(q >= 1)) throw std::invalid_argument("mean_profile: power must be >= 1");
  if (!(r_max > 0) || !(r_max < m.injectivity_radius())) {
    throw std::domain_error("mean_profile: r_max must lie in (0, r_inj)");
  }
  if (grid_size < 5) throw std::invalid_argument("mean_profile: need at least 5 radii");
  MeanProfile p;
  p.manifold = m.id();
  p.center = m.normalize(x);
  p.power = q;
  p.node_count = nodes;
  p.radii.resize(grid_size);
  p.values.resize(grid_size);
  const double h = r_max / grid_size;
  auto integrand = [&](const Point& y) {
    const double v = f(y);
    if (q == 1) return v;
    if (q == 2) return v * v;
    return std::pow(std::abs(v), q);
  };
  for (int i = 0; i < grid_size; ++i) {
    p.radii[i] = h * (i + 1);
    p.values[i] = spherical_mean(m, integrand, p.center, p.radii[i], nodes);
  }
  return p;
}

enum class EpdMode { eigen, square };

struct EpdResidual {
  std::vector<double> radii;
  std::vector<double> residual;

  double max_abs() const {
    double v = 0;
    for (double x : residual) v = std::max(v, std::abs(x));
    return v;
  }
  double min() const { return *std::min_element(residual.begin(), residual.end()); }
};

/// eigen: I'' + g I' + lambda^2 I (vanishes for means of an eigenfunction);
/// square: I'' + g I' + 2 lambda^2 I (nonnegative for means of psi^2).
inline EpdResidual epd_residual(const MeanProfile& profile, const manifold::VolumeGeometry<double>& geometry,
                                double lambda, EpdMode mode) {
  const std::size_t n = profile.values.size();
  if (n < 5) throw std::invalid_argument("epd_residual: need at least 5 grid points");
  const double h = profile.step();
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(profile.radii[i] - h * double(i + 1)) > 1e-9 * h * double(i + 1)) {
      throw std::invalid_argument("epd_residual: radius grid is not uniform");
    }
  }
  const double factor = mode == EpdMode::eigen ? lambda * lambda : 2 * lambda * lambda;
  const auto& v = profile.values;
  const double ghost = profile.origin_value();
  EpdResidual out;
  out.radii = profile.radii;
  out.residual.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d1;
    double d2;
    if (i + 1 < n) {
      const double left = i == 0 ? ghost : v[i - 1];
      d1 = (v[i + 1] - left) / (2 * h);
      d2 = (v[i + 1] - 2 * v[i] + left) / (h * h);
    } else {
      d1 = (3 * v[i] - 4 * v[i - 1] + v[i - 2]) / (2 * h);
      d2 = (2 * v[i] - 5 * v[i - 1] + 4 * v[i - 2] - v[i - 3]) / (h * h);
    }
    out.residual[i] = d2 + geometry.g(profile.radii[i]) * d1 + factor * v[i];
  }
  return out;
}

struct DivergenceCheck {
  double lhs = 0;
  double rhs = 0;
  double relative_error = 0;
};

/// Checks int_0^r (Delta I)(rho) h(rho) d rho = h(r) dI/dr(r) for the means of an
/// eigenfunction, with Delta I = -lambda^2 I. Simpson's rule on the left with the
/// given step, centred differences on the right.
inline DivergenceCheck divergence_identity_check(const ModelManifold& m, const Eigenfunction& f, const Point& x,
                                                 double r, int nodes, double step) {
  if (!(step > 0)) throw std::invalid_argument("divergence_identity_check: step must be positive");
  if (!(r > 0) || !(r + step < m.injectivity_radius())) {
    throw std::domain_error("divergence_identity_check: radius out of range");
  }
  const auto& geo = m.geometry();
  const double lam2 = f.lambda() * f.lambda();
  const int intervals = std::max(2, 2 * static_cast<int>(std::ceil(r / (2 * step))));
  const double dr = r / intervals;
  auto mean = [&](double rho) { return spherical_mean(m, f, x, rho, nodes); };
  double sum = 0;
  for (int i = 1; i <= intervals; ++i) {
    const double rho = dr * i;
    const double integrand = -lam2 * mean(rho) * geo.h(rho);
    sum += (i == intervals ? 1 : (i % 2 == 1 ? 4 : 2)) * integrand;
  }
  DivergenceCheck c;
  c.lhs = sum * dr / 3;
  c.rhs = geo.h(r) * (mean(r + step) - mean(r - step)) / (2 * step);
  c.relative_error = std::abs(c.lhs - c.rhs) / (std::abs(c.rhs) + 1e-14);
  return c;
}

struct MaxResult {
  Point point;
  double value = 0;  // |f(point)|
  bool plateau = false;
};

namespace detail {

inline std::vector<Point> coarse_grid(const ModelManifold& m, int size) {
  const double pi = std::numbers::pi;
  std::vector<Point> pts;
  switch (m.id()) {
    case ManifoldId::t2:
    case ManifoldId::e2: {
      const double offset = m.id() == ManifoldId::e2 ? -pi : 0.0;
      for (int i = 0; i < size; ++i) {
        for (int j = 0; j < size; ++j) pts.push_back(manifold::flat_point(offset + 2 * pi * i / size, offset + 2 * pi * j / size));
      }
      break;
    }
    case ManifoldId::s2: {
      pts.push_back(manifold::s2_point(0, 0));
      pts.push_back(manifold::s2_point(pi, 0));
      for (int i = 1; i < size; ++i) {
        for (int j = 0; j < 2 * size; ++j) pts.push_back(manifold::s2_point(pi * i / size, pi * j / size));
      }
      break;
    }
    case ManifoldId::s3: {
      pts.push_back(manifold::s3_point(0, 0, 0));
      pts.push_back(manifold::s3_point(pi, 0, 0));
      const int polar = std::max(2, size / 2);
      for (int c = 1; c < size; ++c) {
        const double chi = pi * c / size;
        pts.push_back(manifold::s3_point(chi, 0, 0));
        pts.push_back(manifold::s3_point(chi, pi, 0));
        for (int a = 1; a < polar; ++a) {
          for (int b = 0; b < size; ++b) pts.push_back(manifold::s3_point(chi, pi * a / polar, 2 * pi * b / size));
        }
      }
      break;
    }
  }
  return pts;
}

// Newton ascent of sigma*f in normal coordinates around p, with finite-difference
// derivatives of spacing delta; falls back to a short gradient step when the
// Hessian is not negative definite.
template <class F>
Point refine(const ModelManifold& m, const F& f, Point p, double delta, double max_step) {
  const int d = m.dimension();
  const double sigma = f(p) < 0 ? -1.0 : 1.0;
  auto F_at = [&](const Point& base, const std::vector<Vec>& frame, const Eigen::VectorXd& s) {
    Vec v{};
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < 4; ++c) v[c] += s[i] * frame[i][c];
    }
    return sigma * f(m.exp_map(base, v));
  };
  for (int iter = 0; iter < 60; ++iter) {
    const auto frame = m.tangent_frame(p);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(d);
    const double f0 = F_at(p, frame, zero);
    Eigen::VectorXd grad(d);
    Eigen::MatrixXd hess(d, d);
    for (int i = 0; i < d; ++i) {
      Eigen::VectorXd e = zero;
      e[i] = delta;
      const double fp = F_at(p, frame, e);
      const double fm = F_at(p, frame, -e);
      grad[i] = (fp - fm) / (2 * delta);
      hess(i, i) = (fp - 2 * f0 + fm) / (delta * delta);
      for (int j = 0; j < i; ++j) {
        Eigen::VectorXd a = zero;
        a[i] = delta;
        Eigen::VectorXd b = zero;
        b[j] = delta;
        const double mixed =
            (F_at(p, frame, a + b) - F_at(p, frame, a - b) - F_at(p, frame, b - a) + F_at(p, frame, -a - b)) /
            (4 * delta * delta);
        hess(i, j) = mixed;
        hess(j, i) = mixed;
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(hess);
    Eigen::VectorXd s;
    if (eig.eigenvalues().maxCoeff() < 0) {
      s = -hess.ldlt().solve(grad);
    } else {
      const double g = grad.norm();
      if (g == 0) break;
      s = grad * (std::min(max_step, g) / g) * 0.25;
    }
    if (s.norm() > max_step) s *= max_step / s.norm();
    // Backtrack until sigma*f does not decrease.
    double t = 1;
    Eigen::VectorXd accepted;
    for (int k = 0; k < 30; ++k, t /= 2) {
      if (F_at(p, frame, t * s) >= f0) {
        accepted = t * s;
        break;
      }
    }
    if (accepted.size() == 0) break;
    Vec v{};
    for (int i = 0; i < d; ++i) {
      for (int c = 0; c < 4; ++c) v[c] += accepted[i] * frame[i][c];
    }
    p = m.normalize(m.exp_map(p, v));
    if (accepted.norm() < 1e-12) break;
  }
  return p;
}

}  // namespace detail

/// Coarse grid scan of |f| followed by local Newton refinement on a quadratic
/// model. Flags a plateau when distinct grid points tie with the best within 1e-12.
template <class F>
MaxResult locate_max(const ModelManifold& m, const F& f, int coarse) {
  if (coarse < 4) throw std::invalid_argument("locate_max: coarse grid too small");
  const auto pts = detail::coarse_grid(m, coarse);
  std::vector<double> vals(pts.size());
  std::size_t best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    vals[i] = std::abs(f(pts[i]));
    if (vals[i] > vals[best]) best = i;
  }
  MaxResult out;
  int ties = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (vals[best] - vals[i] <= 1e-12 && m.distance(pts[i], pts[best]) > 1e-9) ++ties;
  }
  out.plateau = ties >= 1;
  const double cell = (m.is_sphere() ? std::numbers::pi : 2 * std::numbers::pi) / coarse;
  const Point refined = detail::refine(m, f, pts[best], 1e-3 * cell, cell);
  const double rv = std::abs(f(refined));
  if (rv >= vals[best]) {
    out.point = refined;
    out.value = rv;
  } else {
    out.point = pts[best];
    out.value = vals[best];
  }
  return out;
}

}  // namespace eigmeans::means
