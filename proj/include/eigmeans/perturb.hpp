#pragma once

// Rescaling rho = sqrt(2) lambda r of J'' + g J' + 2 lambda^2 J = 0, the
// expansion K = sum eps^n v_n built by variation of parameters, its
// validation against a direct solve, the kappa scan and the half bound.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "eigmeans/manifold.hpp"
#include "eigmeans/odecmp.hpp"
#include "eigmeans/quadrature.hpp"
#include "eigmeans/specialfun.hpp"

namespace eigmeans::perturb {

/// IEEE quad precision (113-bit significand), header-only.
using Quad = boost::multiprecision::number<boost::multiprecision::cpp_bin_float_quad::backend_type,
                                           boost::multiprecision::et_off>;

/// K'' + ((n-1)/rho) K' + K = eps k_at(rho) K' on [0, rho_max], where
/// k_at(rho) = k(eps rho) for a geometry.
template <class Real = double>
struct RescaledProblem {
  int n = 2;
  Real lambda = 0;
  Real epsilon = 0;
  Real rho_max = Real(1.5);
  std::function<Real(Real)> k_at;
  std::function<Real(Real)> dk_at;  // d/drho k_at, optional (by-parts path)
  std::vector<Real> k_taylor;       // Taylor coefficients of k_at in rho, optional
  double k_sup = 0;                 // sup of |k_at| on [0, rho_max]

  /// The equation as a SingularIvp for the given data.
  odecmp::SingularIvp<Real> ivp(Real u0, Real du0) const {
    odecmp::SingularIvp<Real> p;
    p.pole = Real(n - 1);
    const Real eps = epsilon;
    auto k = k_at;
    p.g_regular = [eps, k](Real rho) { return -eps * k(rho); };
    p.h = [](Real) { return Real(1); };
    if (!k_taylor.empty()) {
      p.g_taylor.resize(k_taylor.size());
      for (std::size_t i = 0; i < k_taylor.size(); ++i) p.g_taylor[i] = -eps * k_taylor[i];
      p.h_taylor.assign(k_taylor.size(), Real(0));
      p.h_taylor[0] = 1;
      p.f_taylor.assign(k_taylor.size(), Real(0));
    }
    p.u0 = u0;
    p.du0 = du0;
    return p;
  }
};

namespace detail {

template <class Real>
double sup_on(const std::function<Real(Real)>& f, Real a, Real b, int samples = 2048) {
  using std::abs;
  double m = 0;
  for (int i = 0; i <= samples; ++i) {
    const Real x = a + (b - a) * Real(i) / Real(samples);
    m = std::max(m, static_cast<double>(abs(f(x))));
  }
  return m;
}

}  // namespace detail

/// Exact substitution r = eps rho with eps = 1/(sqrt(2) lambda).
template <class Real = double>
RescaledProblem<Real> rescale(const manifold::VolumeGeometry<Real>& geometry, Real lambda,
                              Real rho_max = Real(1.5), int taylor_degree = 120) {
  using std::sqrt;
  if (!(lambda > 0)) throw std::invalid_argument("rescale: lambda must be positive");
  RescaledProblem<Real> p;
  p.n = geometry.dimension();
  p.lambda = lambda;
  p.epsilon = 1 / (sqrt(Real(2)) * lambda);
  p.rho_max = rho_max;
  if (!(p.epsilon * rho_max < geometry.mean_radius_cap())) {
    throw std::domain_error("rescale: lambda too small, rho_max/(sqrt(2) lambda) exceeds the valid radius range");
  }
  const Real eps = p.epsilon;
  p.k_at = [geometry, eps](Real rho) { return geometry.correction_k(eps * rho); };
  p.dk_at = [geometry, eps](Real rho) { return eps * geometry.correction_k_derivative(eps * rho); };
  const auto c = geometry.correction_taylor(taylor_degree);
  p.k_taylor.resize(c.size());
  Real power = 1;
  for (std::size_t m = 0; m < c.size(); ++m) {
    p.k_taylor[m] = -c[m] * power;
    power *= eps;
  }
  p.k_sup = detail::sup_on<Real>(p.k_at, Real(0), rho_max);
  return p;
}

/// A problem with a user-supplied correction k_at (already in rho).
template <class Real = double>
RescaledProblem<Real> synthetic_problem(int n, Real epsilon, std::function<Real(Real)> k_at,
                                        std::function<Real(Real)> dk_at = {}, Real rho_max = Real(1.5)) {
  specialfun::BesselOrder::for_dimension(n);
  RescaledProblem<Real> p;
  p.n = n;
  p.epsilon = epsilon;
  p.lambda = 1 / (std::sqrt(2.0) * static_cast<double>(epsilon));
  p.rho_max = rho_max;
  p.k_at = std::move(k_at);
  p.dk_at = std::move(dk_at);
  p.k_sup = detail::sup_on<Real>(p.k_at, Real(0), rho_max);
  return p;
}

/// Max over the grid of |J(eps rho) - K(rho)|: J solved in r, K in rho, both by RK4.
inline double round_trip_discrepancy(const manifold::VolumeGeometry<double>& geometry, double lambda,
                                     double rho_max = 1.5, int steps = 4096) {
  const auto p = rescale(geometry, lambda, rho_max);
  const auto k_sol = odecmp::solve_ivp(p.ivp(1.0, 0.0), rho_max / steps, rho_max);
  odecmp::SingularIvp<double> direct;
  direct.pole = geometry.dimension() - 1;
  direct.g_regular = [geometry](double r) { return geometry.c(r); };
  direct.h = [lambda](double) { return 2 * lambda * lambda; };
  const double X = p.epsilon * rho_max;
  const auto j_sol = odecmp::solve_ivp(direct, X / steps, X);
  double worst = 0;
  for (std::size_t i = 0; i < k_sol.grid.size(); ++i) {
    worst = std::max(worst, std::abs(j_sol.value(p.epsilon * k_sol.grid[i]) - k_sol.u[i]));
  }
  return worst;
}

struct SeriesOptions {
  int output_points = 4096;  // intervals of the uniform output grid on [0, rho_max]
  int uniform_panels = 64;
  int grading_levels = 16;
  int nodes_per_panel = 20;
  bool by_parts = true;
  bool verify = true;

  /// Panel resolution that reaches the working precision of Real.
  template <class Real>
  static SeriesOptions for_precision() {
    SeriesOptions o;
    if (std::numeric_limits<Real>::digits > 64) {
      o.grading_levels = 24;
      o.nodes_per_panel = 40;
    }
    return o;
  }
};

template <class Real = double>
struct PerturbationSeries {
  int order = 0;
  int n = 2;
  Real epsilon = 0;
  std::vector<Real> rho;                  // uniform output grid
  std::vector<std::vector<Real>> v;       // v[j][i] = v_j(rho_i)
  std::vector<std::vector<Real>> dv;      // derivatives
  std::vector<double> sup;                // ||v_j||_inf
  std::vector<double> dsup;               // ||v_j'||_inf
  std::vector<double> ivp_residual;       // max |L v_j - k v_{j-1}'| / (1 + ||k v_{j-1}'||_inf)
  std::vector<double> solver_discrepancy; // max |v_j - RK4 solve| / max(||v_j||, tiny)
  std::vector<double> by_parts_discrepancy;

  /// S_m = sum_{j<=m} eps^j v_j on the output grid.
  std::vector<Real> partial_sum(int m) const {
    std::vector<Real> s(rho.size(), Real(0));
    Real power = 1;
    for (int j = 0; j <= m; ++j) {
      for (std::size_t i = 0; i < rho.size(); ++i) s[i] += power * v[j][i];
      power *= epsilon;
    }
    return s;
  }
  /// ||v_{j+1}||/||v_j||, 0 when ||v_j|| = 0.
  double norm_ratio(int j) const { return sup[j] == 0 ? 0.0 : sup[j + 1] / sup[j]; }
  double derivative_ratio(int j) const { return dsup[j] == 0 ? 0.0 : dsup[j + 1] / dsup[j]; }
};

namespace detail {

template <class Real>
double max_abs(const std::vector<Real>& v) {
  using std::abs;
  double m = 0;
  for (const Real& x : v) m = std::max(m, static_cast<double>(abs(x)));
  return m;
}

}  // namespace detail

/// v_0 = normalized y1 and v_{j+1} = y2 int_0 (y1/W) k v_j' - y1 int_0 (y2/W) k v_j',
/// integrated spectrally on graded Chebyshev panels, then sampled on the uniform grid.
template <class Real>
PerturbationSeries<Real> compute_vn(const RescaledProblem<Real>& problem, int N,
                                    const SeriesOptions& opt = SeriesOptions::for_precision<Real>()) {
  using std::abs;
  if (N < 0 || N > 12) throw std::invalid_argument("compute_vn: order must be in 0..12");
  if (!problem.k_at) throw std::invalid_argument("compute_vn: problem has no correction");
  const int n = problem.n;
  const specialfun::FundamentalPair<Real> pair(n);
  const auto grid = quad::PanelGrid<Real>::graded(problem.rho_max, opt.uniform_panels, opt.grading_levels,
                                                  opt.nodes_per_panel);
  const auto& t = grid.nodes();
  const std::size_t M = t.size();

  // Fundamental-pair data at the panel nodes; y2 terms are unused at t = 0.
  std::vector<Real> y1(M), dy1(M), y2(M), dy2(M), a1(M), a2(M), da1(M), da2(M), k(M), dk(M);
  for (std::size_t i = 0; i < M; ++i) {
    y1[i] = pair.y1(t[i]);
    dy1[i] = pair.dy1(t[i]);
    a1[i] = pair.y1_over_wronskian(t[i]);
    da1[i] = pair.d_y1_over_wronskian(t[i]);
    a2[i] = pair.y2_over_wronskian(t[i]);
    k[i] = problem.k_at(t[i]);
    dk[i] = problem.dk_at ? problem.dk_at(t[i]) : Real(0);
    if (t[i] > 0) {
      y2[i] = pair.y2(t[i]);
      dy2[i] = pair.dy2(t[i]);
      da2[i] = pair.d_y2_over_wronskian(t[i]);
    }
  }

  std::vector<std::vector<Real>> pv(N + 1, std::vector<Real>(M));
  std::vector<std::vector<Real>> pdv(N + 1, std::vector<Real>(M));
  for (std::size_t i = 0; i < M; ++i) {
    pv[0][i] = specialfun::v0_profile<Real>(n, t[i]);
    pdv[0][i] = specialfun::v0_derivative<Real>(n, t[i]);
  }

  PerturbationSeries<Real> s;
  s.order = N;
  s.n = n;
  s.epsilon = problem.epsilon;
  std::vector<double> by_parts(N + 1, 0.0);
  std::vector<Real> fa(M), fb(M);
  for (int j = 0; j < N; ++j) {
    for (std::size_t i = 0; i < M; ++i) {
      fa[i] = a1[i] * k[i] * pdv[j][i];
      fb[i] = a2[i] * k[i] * pdv[j][i];
    }
    const auto A = grid.cumulative_integral(fa);
    const auto B = grid.cumulative_integral(fb);
    for (std::size_t i = 0; i < M; ++i) {
      if (t[i] == 0) {
        pv[j + 1][i] = 0;
        pdv[j + 1][i] = 0;
        continue;
      }
      pv[j + 1][i] = y2[i] * A[i] - y1[i] * B[i];
      pdv[j + 1][i] = dy2[i] * A[i] - dy1[i] * B[i];
    }
    if (opt.by_parts && problem.dk_at) {
      // int (y/W) k v' = (y/W) k v - int [(y/W)' k + (y/W) k'] v
      for (std::size_t i = 0; i < M; ++i) {
        fa[i] = (da1[i] * k[i] + a1[i] * dk[i]) * pv[j][i];
        fb[i] = t[i] == 0 ? Real(0) : (da2[i] * k[i] + a2[i] * dk[i]) * pv[j][i];
      }
      const auto Ap = grid.cumulative_integral(fa);
      const auto Bp = grid.cumulative_integral(fb);
      double worst = 0;
      for (std::size_t i = 0; i < M; ++i) {
        if (t[i] == 0) continue;
        const Real A2 = a1[i] * k[i] * pv[j][i] - Ap[i];
        const Real B2 = a2[i] * k[i] * pv[j][i] - Bp[i];
        worst = std::max(worst, static_cast<double>(abs(y2[i] * A2 - y1[i] * B2 - pv[j + 1][i])));
      }
      by_parts[j + 1] = worst;
    }
  }

  // Sample on the uniform output grid.
  const int P = opt.output_points;
  s.rho.resize(P + 1);
  for (int i = 0; i <= P; ++i) s.rho[i] = problem.rho_max * Real(i) / Real(P);
  s.rho[P] = problem.rho_max;
  s.v.assign(N + 1, std::vector<Real>(P + 1));
  s.dv.assign(N + 1, std::vector<Real>(P + 1));
  for (int j = 0; j <= N; ++j) {
    for (int i = 0; i <= P; ++i) {
      if (j == 0) {
        s.v[0][i] = specialfun::v0_profile<Real>(n, s.rho[i]);
        s.dv[0][i] = specialfun::v0_derivative<Real>(n, s.rho[i]);
      } else {
        s.v[j][i] = grid.interpolate(s.rho[i], pv[j]);
        s.dv[j][i] = grid.interpolate(s.rho[i], pdv[j]);
      }
    }
    s.sup.push_back(detail::max_abs(s.v[j]));
    s.dsup.push_back(detail::max_abs(s.dv[j]));
  }
  s.by_parts_discrepancy = by_parts;

  // Independent checks: residual of L v_j = k v_{j-1}' by 4th-order differences
  // of v_j', and agreement with an RK4 solve of the same IVP.
  s.ivp_residual.assign(N + 1, 0.0);
  s.solver_discrepancy.assign(N + 1, 0.0);
  if (opt.verify) {
    const Real h = s.rho[1] - s.rho[0];
    for (int j = 0; j <= N; ++j) {
      double worst = 0;
      double scale = 0;
      for (int i = 2; i + 2 <= P; ++i) {
        const Real x = s.rho[i];
        const Real d2 = (-s.dv[j][i + 2] + 8 * s.dv[j][i + 1] - 8 * s.dv[j][i - 1] + s.dv[j][i - 2]) / (12 * h);
        const Real forcing = j == 0 ? Real(0) : problem.k_at(x) * s.dv[j - 1][i];
        const Real r = d2 + Real(n - 1) / x * s.dv[j][i] + s.v[j][i] - forcing;
        worst = std::max(worst, static_cast<double>(abs(r)));
        scale = std::max(scale, static_cast<double>(abs(forcing)));
      }
      s.ivp_residual[j] = worst / (scale + s.sup[j] + 1e-300);
    }
    for (int j = 1; j <= N; ++j) {
      odecmp::SingularIvp<double> ivp;
      ivp.pole = n - 1;
      ivp.h = [](double) { return 1.0; };
      const auto& prev = pdv[j - 1];
      auto k_fn = problem.k_at;
      ivp.f = [&grid, &prev, k_fn](double x) {
        return static_cast<double>(k_fn(Real(x)) * grid.interpolate(Real(x), prev));
      };
      ivp.u0 = 0;
      ivp.du0 = 0;
      const double rho_max = static_cast<double>(problem.rho_max);
      const auto sol = odecmp::solve_ivp(ivp, rho_max / 1024, rho_max);
      double worst = 0;
      for (std::size_t i = 0; i < sol.grid.size(); ++i) {
        const double ref = static_cast<double>(grid.interpolate(Real(sol.grid[i]), pv[j]));
        worst = std::max(worst, std::abs(sol.u[i] - ref));
      }
      s.solver_discrepancy[j] = s.sup[j] > 0 ? worst / s.sup[j] : worst;
    }
  }
  return s;
}

/// Direct solve of the rescaled equation by its regular Frobenius series,
/// from the exact Taylor coefficients of k_at.
template <class Real>
odecmp::OdeSolution<Real> direct_solve(const RescaledProblem<Real>& problem, const std::vector<Real>& grid) {
  if (problem.k_taylor.empty()) throw std::invalid_argument("direct_solve: problem has no Taylor data");
  const int degree = static_cast<int>(problem.k_taylor.size()) + 1;
  return odecmp::series_solve(problem.ivp(Real(1), Real(0)), grid, degree);
}

struct SeriesError {
  double epsilon = 0;
  std::vector<double> errors;  // errors[m] = ||S_m - K||_inf, m = 0..N
  double rk4_vs_direct = 0;    // sanity check of the direct solve
};

/// Compares every partial sum with the direct solve on [0, rho_max].
template <class Real>
SeriesError assemble_and_validate(const PerturbationSeries<Real>& series, const RescaledProblem<Real>& problem) {
  using std::abs;
  SeriesError e;
  e.epsilon = static_cast<double>(series.epsilon);
  const auto K = direct_solve(problem, series.rho);
  for (int m = 0; m <= series.order; ++m) {
    const auto S = series.partial_sum(m);
    double worst = 0;
    for (std::size_t i = 0; i < S.size(); ++i) worst = std::max(worst, static_cast<double>(abs(S[i] - K.u[i])));
    e.errors.push_back(worst);
  }
  odecmp::SingularIvp<double> ivp;
  ivp.pole = problem.n - 1;
  const double eps = static_cast<double>(problem.epsilon);
  auto k = problem.k_at;
  ivp.g_regular = [eps, k](double x) { return -eps * static_cast<double>(k(Real(x))); };
  ivp.h = [](double) { return 1.0; };
  const double rho_max = static_cast<double>(problem.rho_max);
  const auto rk = odecmp::solve_ivp(ivp, rho_max / 2048, rho_max);
  const auto coeffs = odecmp::frobenius_coefficients(problem.ivp(Real(1), Real(0)),
                                                     static_cast<int>(problem.k_taylor.size()) + 1, Real(0));
  double worst = 0;
  for (std::size_t i = 0; i < rk.grid.size(); ++i) {
    const Real direct = odecmp::eval_series(coeffs, Real(rk.grid[i])).first;
    worst = std::max(worst, std::abs(rk.u[i] - static_cast<double>(direct)));
  }
  e.rk4_vs_direct = worst;
  return e;
}

/// Least-squares slope of log(error) against log(epsilon).
inline double fit_slope(const std::vector<double>& epsilons, const std::vector<double>& errors) {
  if (epsilons.size() != errors.size() || epsilons.size() < 2) throw std::invalid_argument("fit_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(epsilons.size());
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0) || !(errors[i] > 0)) throw std::domain_error("fit_slope: values must be positive");
    const double x = std::log(epsilons[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

struct KappaResult {
  int n = 2;
  double threshold = 0.75;
  double kappa_star = 0;
  bool flagged = false;  // threshold >= 1: no positive kappa exists
};

/// Largest kappa with v0 >= threshold on (0, kappa), by bisection.
inline KappaResult kappa_scan(int n, double threshold = 0.75) {
  specialfun::BesselOrder::for_dimension(n);
  if (!(threshold > 0)) throw std::invalid_argument("kappa_scan: threshold must be positive");
  KappaResult r;
  r.n = n;
  r.threshold = threshold;
  if (threshold >= 1) {
    r.flagged = true;
    return r;
  }
  double lo = 0;
  double hi = 0.01;
  while (specialfun::v0_profile(n, hi) >= threshold) {
    lo = hi;
    hi += 0.01;
  }
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (specialfun::v0_profile(n, mid) >= threshold ? lo : hi) = mid;
  }
  r.kappa_star = lo;
  return r;
}

struct HalfBound {
  double lambda = 0;
  double kappa = 0;
  double radius = 0;  // kappa / (sqrt(2) lambda)
  double margin = 0;  // min over (0, radius] of J/J(0) - 1/2
};

/// Solves J'' + g J' + 2 lambda^2 J = 0, J(0) = 1, J'(0) = 0 on r in (0, kappa eps],
/// i.e. rho in (0, kappa), and returns min J - 1/2.
inline HalfBound half_bound_certify(const manifold::VolumeGeometry<double>& geometry, double lambda, double kappa,
                                    int steps = 4000) {
  if (!(lambda > 0) || !(kappa > 0)) throw std::invalid_argument("half_bound_certify: lambda, kappa must be positive");
  HalfBound b;
  b.lambda = lambda;
  b.kappa = kappa;
  b.radius = kappa / (std::sqrt(2.0) * lambda);
  if (!(b.radius < geometry.mean_radius_cap())) throw std::domain_error("half_bound_certify: kappa/lambda out of range");
  odecmp::SingularIvp<double> p;
  p.pole = geometry.dimension() - 1;
  p.g_regular = [geometry](double r) { return geometry.c(r); };
  const auto c = geometry.correction_taylor(3);
  p.g_taylor.assign(c.begin(), c.end());
  p.h = [lambda](double) { return 2 * lambda * lambda; };
  p.h_taylor = {2 * lambda * lambda, 0, 0};
  p.f_taylor = {0, 0, 0};
  const auto sol = odecmp::solve_ivp(p, b.radius / steps, b.radius);
  b.margin = std::numeric_limits<double>::infinity();
  for (double u : sol.u) b.margin = std::min(b.margin, u - 0.5);
  return b;
}

}  // namespace eigmeans::perturb
