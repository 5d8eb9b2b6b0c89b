#pragma once

// Second-order initial value problems u'' + g u' + h u = f with a possible
// 1/x singularity of g at the origin, and the comparison principle for the
// operator L u = u'' + g u' + h u.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace eigmeans::odecmp {

/// u'' + g(x) u' + h(x) u = f(x) on (0, X], with g(x) = pole/x + g_regular(x).
/// pole > 0 is the alpha = -1 case; pole = 0 means g is regular at 0.
/// The *_taylor vectors hold Taylor coefficients about 0; missing ones are
/// estimated from samples.
template <class Real = double>
struct SingularIvp {
  Real pole = 0;
  std::function<Real(Real)> g_regular = [](Real) { return Real(0); };
  std::function<Real(Real)> h = [](Real) { return Real(0); };
  std::function<Real(Real)> f = [](Real) { return Real(0); };
  Real u0 = 1;
  Real du0 = 0;
  std::vector<Real> g_taylor;
  std::vector<Real> h_taylor;
  std::vector<Real> f_taylor;

  Real g(Real x) const { return pole / x + g_regular(x); }
  /// Exponent of the leading singularity of g: -1 or 0.
  int alpha() const { return pole != 0 ? -1 : 0; }
  Real residual(Real x, Real u, Real du, Real d2u) const { return d2u + g(x) * du + h(x) * u - f(x); }
};

class BlowUpError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class Real = double>
struct OdeSolution {
  std::vector<Real> grid;  // grid[0] = 0
  std::vector<Real> u;
  std::vector<Real> du;
  Real max_residual = 0;  // max |L u - f| at interior nodes, 4th-order differences of u'

  Real end() const { return grid.back(); }

  Real sup_norm() const {
    using std::abs;
    Real m = 0;
    for (const Real& v : u) m = std::max<Real>(m, abs(v));
    return m;
  }

  /// Cubic Hermite interpolation of (u, u').
  Real value(Real x) const { return hermite(x, false); }
  Real slope(Real x) const { return hermite(x, true); }

 private:
  Real hermite(Real x, bool derivative) const {
    if (x < grid.front() || x > grid.back()) throw std::domain_error("OdeSolution: x outside the grid");
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    if (i + 1 >= grid.size()) i = grid.size() - 2;
    const Real h = grid[i + 1] - grid[i];
    const Real t = (x - grid[i]) / h;
    const Real t2 = t * t;
    const Real t3 = t2 * t;
    if (!derivative) {
      return (2 * t3 - 3 * t2 + 1) * u[i] + (t3 - 2 * t2 + t) * h * du[i] + (-2 * t3 + 3 * t2) * u[i + 1] +
             (t3 - t2) * h * du[i + 1];
    }
    return ((6 * t2 - 6 * t) * u[i] + (6 * t - 6 * t2) * u[i + 1]) / h + (3 * t2 - 4 * t + 1) * du[i] +
           (3 * t2 - 2 * t) * du[i + 1];
  }
};

namespace detail {

// First `count` Taylor coefficients of fn about 0 from the degree-4 polynomial
// through fn(0), fn(d), ..., fn(4d).
template <class Real>
std::vector<Real> forward_fit(const std::function<Real(Real)>& fn, Real d, int count) {
  Real s[5];
  for (int k = 0; k < 5; ++k) s[k] = fn(d * Real(k));
  // Newton forward differences -> monomial coefficients in t = x/d.
  Real diff[5];
  for (int k = 0; k < 5; ++k) diff[k] = s[k];
  for (int level = 1; level < 5; ++level) {
    for (int k = 4; k >= level; --k) diff[k] = diff[k] - diff[k - 1];
  }
  // p(t) = sum diff[j] * C(t, j); expand falling factorials.
  Real poly[5] = {0, 0, 0, 0, 0};
  Real basis[5] = {1, 0, 0, 0, 0};  // t(t-1)...(t-j+1)/j!
  for (int j = 0; j < 5; ++j) {
    if (j > 0) {
      Real next[5] = {0, 0, 0, 0, 0};
      for (int c = 0; c < 5; ++c) {
        if (c + 1 < 5) next[c + 1] += basis[c];
        next[c] -= Real(j - 1) * basis[c];
      }
      for (int c = 0; c < 5; ++c) basis[c] = next[c] / Real(j);
    }
    for (int c = 0; c < 5; ++c) poly[c] += diff[j] * basis[c];
  }
  std::vector<Real> out(count);
  Real scale = 1;
  for (int c = 0; c < count; ++c) {
    out[c] = poly[c] / scale;
    scale *= d;
  }
  return out;
}

template <class Real>
std::vector<Real> padded(const std::vector<Real>& v, std::size_t n) {
  std::vector<Real> out(v);
  out.resize(std::max(n, v.size()), Real(0));
  return out;
}

}  // namespace detail

/// Coefficients c_0..c_degree of the regular Frobenius solution
/// u = sum c_j x^j. Taylor data must cover degree - 2; when a Taylor vector is
/// empty it is estimated (only up to degree 2, enough for the degree-4 start).
template <class Real>
std::vector<Real> frobenius_coefficients(const SingularIvp<Real>& p, int degree, Real fit_step) {
  using std::abs;
  if (p.pole < 0) throw std::invalid_argument("SingularIvp: negative pole coefficient is not supported");
  if (p.pole != 0 && p.du0 != 0) {
    throw std::invalid_argument("SingularIvp: u'(0) must be 0 for the regular solution when g ~ pole/x");
  }
  const std::size_t need = static_cast<std::size_t>(std::max(degree - 1, 1));
  auto taylor = [&](const std::vector<Real>& given, const std::function<Real(Real)>& fn) {
    if (!given.empty()) {
      if (given.size() < need && degree > 4) throw std::invalid_argument("SingularIvp: Taylor data too short");
      return detail::padded(given, need);
    }
    if (degree > 4) throw std::invalid_argument("SingularIvp: Taylor data required beyond degree 4");
    return detail::padded(detail::forward_fit<Real>(fn, fit_step, 3), need);
  };
  const auto G = taylor(p.g_taylor, p.g_regular);
  const auto H = taylor(p.h_taylor, p.h);
  const auto F = taylor(p.f_taylor, p.f);
  std::vector<Real> c(static_cast<std::size_t>(degree) + 1, Real(0));
  c[0] = p.u0;
  if (degree >= 1) c[1] = p.du0;
  for (int j = 0; j + 2 <= degree; ++j) {
    Real s = F[j];
    for (int i = 0; i <= j; ++i) s -= G[i] * Real(j + 1 - i) * c[j + 1 - i];
    for (int i = 0; i <= j; ++i) s -= H[i] * c[j - i];
    c[j + 2] = s / (Real(j + 2) * (Real(j + 1) + p.pole));
  }
  return c;
}

template <class Real>
std::pair<Real, Real> eval_series(const std::vector<Real>& c, Real x) {
  Real v = 0;
  Real d = 0;
  for (std::size_t j = c.size(); j-- > 0;) {
    v = v * x + c[j];
    if (j > 0) d = d * x + Real(j) * c[j];
  }
  return {v, d};
}

namespace detail {

template <class Real>
Real residual_estimate(const SingularIvp<Real>& p, const OdeSolution<Real>& s) {
  using std::abs;
  Real worst = 0;
  const std::size_t n = s.grid.size();
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const Real h = s.grid[k + 1] - s.grid[k];
    if (abs((s.grid[k] - s.grid[k - 1]) - h) > h * Real(1e-6) || abs((s.grid[k + 2] - s.grid[k + 1]) - h) > h * Real(1e-6) ||
        abs((s.grid[k - 1] - s.grid[k - 2]) - h) > h * Real(1e-6)) {
      continue;
    }
    const Real d2 = (-s.du[k + 2] + 8 * s.du[k + 1] - 8 * s.du[k - 1] + s.du[k - 2]) / (12 * h);
    worst = std::max<Real>(worst, abs(p.residual(s.grid[k], s.u[k], s.du[k], d2)));
  }
  return worst;
}

}  // namespace detail

/// Classical RK4 with uniform step from x0 = max(10 step, 1e-3 X) (rounded up
/// to a multiple of step), started from the degree-4 series about 0. Grid
/// points below x0 take series values.
template <class Real>
OdeSolution<Real> solve_ivp(const SingularIvp<Real>& p, Real step, Real X) {
  using std::abs;
  using std::ceil;
  using std::max;
  if (!(step > 0)) throw std::invalid_argument("solve_ivp: step must be positive");
  if (!(X > step)) throw std::invalid_argument("solve_ivp: X must exceed the step");
  const Real start_raw = max(Real(10) * step, Real(1e-3) * X);
  const long start_index = static_cast<long>(ceil(static_cast<double>(start_raw / step) - 1e-9));
  const Real x0 = step * Real(start_index);
  if (!(x0 < X)) throw std::invalid_argument("solve_ivp: interval too short for the series start");
  const auto c = frobenius_coefficients<Real>(p, 4, x0 / 8);

  OdeSolution<Real> s;
  for (long k = 0; k <= start_index; ++k) {
    const Real x = step * Real(k);
    const auto [v, d] = eval_series(c, x);
    s.grid.push_back(x);
    s.u.push_back(v);
    s.du.push_back(d);
  }
  auto rhs = [&](Real x, Real u, Real du) { return p.f(x) - p.g(x) * du - p.h(x) * u; };
  Real x = x0;
  Real u = s.u.back();
  Real du = s.du.back();
  const Real limit = Real(1e12);
  long index = start_index;
  while (x < X) {
    ++index;
    Real next = step * Real(index);
    if (next > X - step * Real(1e-9)) next = X;
    const Real h = next - x;
    const Real k1u = du;
    const Real k1v = rhs(x, u, du);
    const Real k2u = du + h / 2 * k1v;
    const Real k2v = rhs(x + h / 2, u + h / 2 * k1u, du + h / 2 * k1v);
    const Real k3u = du + h / 2 * k2v;
    const Real k3v = rhs(x + h / 2, u + h / 2 * k2u, du + h / 2 * k2v);
    const Real k4u = du + h * k3v;
    const Real k4v = rhs(x + h, u + h * k3u, du + h * k3v);
    u += h / 6 * (k1u + 2 * k2u + 2 * k3u + k4u);
    du += h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v);
    x = next;
    if (!(abs(u) <= limit) || !(abs(du) <= limit)) {
      throw BlowUpError("solve_ivp: |u| exceeded 1e12 near x = " + std::to_string(static_cast<double>(x)));
    }
    s.grid.push_back(x);
    s.u.push_back(u);
    s.du.push_back(du);
  }
  s.max_residual = detail::residual_estimate(p, s);
  return s;
}

/// Evaluates the regular Frobenius series of the given degree on a grid.
/// Requires Taylor data for g_regular, h and f up to degree - 2.
template <class Real>
OdeSolution<Real> series_solve(const SingularIvp<Real>& p, const std::vector<Real>& grid, int degree) {
  const auto c = frobenius_coefficients<Real>(p, degree, Real(0));
  OdeSolution<Real> s;
  s.grid = grid;
  s.u.reserve(grid.size());
  s.du.reserve(grid.size());
  for (const Real& x : grid) {
    const auto [v, d] = eval_series(c, x);
    s.u.push_back(v);
    s.du.push_back(d);
  }
  s.max_residual = detail::residual_estimate(p, s);
  return s;
}

// ---------------------------------------------------------------------------
// Comparison principle

/// The operator L u = u'' + g u' + h u, with the tolerances of a certificate.
template <class Real = double>
struct ComparisonProblem {
  std::function<Real(Real)> g;
  std::function<Real(Real)> h;
  /// Slack on Lu >= 0 and L phi <= 0; negative means 1e-8 (1 + ||u||_inf).
  Real hypothesis_tol = -1;
  /// Relative slack on min(u - phi) >= -tol ||phi||_inf and on the ratio scan.
  Real conclusion_tol = Real(1e-8);
  /// Also require u(0) = phi(0), u'(0) = phi'(0) and g > 0 (matched-data part).
  bool matched_data = true;
  /// Skip the hypothesis checks and judge the conclusion only.
  bool assume_hypotheses = false;
};

enum class Outcome { pass, fail, hypotheses_not_met };

inline const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::pass: return "pass";
    case Outcome::fail: return "fail";
    case Outcome::hypotheses_not_met: return "hypotheses_not_met";
  }
  return "?";
}

template <class Real = double>
struct Certificate {
  Outcome outcome = Outcome::pass;
  Real min_margin = 0;        // min over the grid of u - phi
  Real margin_tolerance = 0;  // tol * ||phi||_inf
  Real ratio_excess = 0;      // interior max of u/phi minus its larger endpoint value
  bool ratio_ok = true;
  Real worst_lu = 0;    // min L u
  Real worst_lphi = 0;  // max L phi
  std::string diagnostic;
};

namespace detail {

template <class Real>
std::vector<Real> apply_operator(const OdeSolution<Real>& s, const std::function<Real(Real)>& g,
                                 const std::function<Real(Real)>& h) {
  const std::size_t n = s.grid.size();
  std::vector<Real> out(n, std::numeric_limits<Real>::quiet_NaN());
  for (std::size_t k = 2; k + 2 < n; ++k) {
    const Real step = s.grid[k + 1] - s.grid[k];
    const Real d2 = (-s.du[k + 2] + 8 * s.du[k + 1] - 8 * s.du[k - 1] + s.du[k - 2]) / (12 * step);
    out[k] = d2 + g(s.grid[k]) * s.du[k] + h(s.grid[k]) * s.u[k];
  }
  return out;
}

}  // namespace detail

/// Certifies u >= phi (matched data) and the absence of an interior positive
/// maximum of u/phi, after numerically checking L u >= 0, L phi <= 0, phi > 0.
/// Both solutions must share the same grid.
template <class Real>
Certificate<Real> comparison_certificate(const OdeSolution<Real>& u, const OdeSolution<Real>& phi,
                                         const ComparisonProblem<Real>& L) {
  using std::abs;
  if (u.grid.size() != phi.grid.size() || u.grid.size() < 5) {
    throw std::invalid_argument("comparison_certificate: solutions must share a grid of >= 5 points");
  }
  for (std::size_t i = 0; i < u.grid.size(); ++i) {
    if (abs(u.grid[i] - phi.grid[i]) > Real(1e-12) * (1 + abs(u.grid[i]))) {
      throw std::invalid_argument("comparison_certificate: grids differ");
    }
  }
  Certificate<Real> c;
  const Real phi_sup = phi.sup_norm();
  const Real hyp_tol = L.hypothesis_tol >= 0 ? L.hypothesis_tol : Real(1e-8) * (1 + u.sup_norm());
  c.margin_tolerance = L.conclusion_tol * phi_sup;

  const auto lu = detail::apply_operator(u, L.g, L.h);
  const auto lphi = detail::apply_operator(phi, L.g, L.h);
  c.worst_lu = std::numeric_limits<Real>::infinity();
  c.worst_lphi = -std::numeric_limits<Real>::infinity();
  for (std::size_t k = 2; k + 2 < lu.size(); ++k) {
    c.worst_lu = std::min(c.worst_lu, lu[k]);
    c.worst_lphi = std::max(c.worst_lphi, lphi[k]);
  }

  std::string why;
  if (c.worst_lu < -hyp_tol) why += "L u >= 0 violated; ";
  if (c.worst_lphi > hyp_tol) why += "L phi <= 0 violated; ";
  for (std::size_t i = 1; i < phi.u.size(); ++i) {
    if (!(phi.u[i] > 0)) {
      why += "phi not positive; ";
      break;
    }
  }
  if (L.matched_data) {
    if (abs(u.u[0] - phi.u[0]) > Real(1e-10) || abs(u.du[0] - phi.du[0]) > Real(1e-10)) {
      why += "initial data not matched; ";
    }
    for (std::size_t i = 1; i < u.grid.size(); ++i) {
      if (!(L.g(u.grid[i]) > 0)) {
        why += "g not positive; ";
        break;
      }
    }
  }

  c.min_margin = std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < u.u.size(); ++i) c.min_margin = std::min(c.min_margin, u.u[i] - phi.u[i]);

  // Ratio scan; skips points where phi is not positive.
  Real interior = -std::numeric_limits<Real>::infinity();
  for (std::size_t i = 1; i + 1 < u.u.size(); ++i) {
    if (phi.u[i] > 0) interior = std::max(interior, u.u[i] / phi.u[i]);
  }
  const Real first = phi.u.front() > 0 ? u.u.front() / phi.u.front() : -std::numeric_limits<Real>::infinity();
  const Real last = phi.u.back() > 0 ? u.u.back() / phi.u.back() : -std::numeric_limits<Real>::infinity();
  const Real boundary = std::max(first, last);
  c.ratio_excess = interior - boundary;
  c.ratio_ok = !(interior > 0 && c.ratio_excess > L.conclusion_tol * std::max<Real>(Real(1), abs(boundary)));

  const bool conclusion = (!L.matched_data || c.min_margin >= -c.margin_tolerance) && c.ratio_ok;
  if (!why.empty() && !L.assume_hypotheses) {
    c.outcome = Outcome::hypotheses_not_met;
    c.diagnostic = why;
  } else {
    c.outcome = conclusion ? Outcome::pass : Outcome::fail;
    if (!conclusion) {
      c.diagnostic = c.ratio_ok ? "u - phi negative beyond tolerance" : "u/phi has an interior positive maximum";
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// Barriers

enum class BarrierKind { hopf, growth };

/// hopf: v = exp(-M (x - x0)) - 1; growth: v = e^x - x - 1.
struct Barrier {
  BarrierKind kind = BarrierKind::growth;
  double M = 0;
  double x0 = 0;

  double value(double x) const {
    return kind == BarrierKind::hopf ? std::exp(-M * (x - x0)) - 1 : std::expm1(x) - x;
  }
  double d1(double x) const { return kind == BarrierKind::hopf ? -M * std::exp(-M * (x - x0)) : std::expm1(x); }
  double d2(double x) const { return kind == BarrierKind::hopf ? M * M * std::exp(-M * (x - x0)) : std::exp(x); }
  double apply(double x, double g, double h) const { return d2(x) + g * d1(x) + h * value(x); }
};

inline Barrier make_barrier(BarrierKind kind, double M = 0, double x0 = 0) {
  if (kind == BarrierKind::hopf && (!(M > 0) || !(x0 > 0))) {
    throw std::invalid_argument("hopf barrier needs M > 0 and x0 > 0");
  }
  Barrier b;
  b.kind = kind;
  b.M = M;
  b.x0 = x0;
  return b;
}

/// Least M with M^2 - G M - H >= 0, which makes L v >= 0 for the hopf barrier
/// on [a, x0] whenever |g| <= G and |h| <= H there. Doubling then bisection.
struct HopfConstant {
  double M = 0;
  int doublings = 0;
};

inline HopfConstant least_hopf_constant(double g_bound, double h_bound) {
  if (!(g_bound >= 0) || !(h_bound >= 0)) throw std::invalid_argument("least_hopf_constant: bounds must be >= 0");
  auto ok = [&](double M) { return M * M - g_bound * M - h_bound >= 0; };
  HopfConstant r;
  double hi = 1.0 / 1024;
  while (!ok(hi)) {
    hi *= 2;
    if (++r.doublings > 70 || hi > std::ldexp(1.0, 60)) {
      throw std::runtime_error("least_hopf_constant: no admissible M below 2^60");
    }
  }
  double lo = hi / 2;
  if (ok(lo)) lo = 0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = (lo + hi) / 2;
    (ok(mid) ? hi : lo) = mid;
  }
  r.M = hi;
  return r;
}

/// Samples the sign and convexity invariants of a barrier on [a, b].
inline bool verify_barrier(const Barrier& v, double a, double b, int samples = 1000) {
  for (int i = 0; i <= samples; ++i) {
    const double x = a + (b - a) * i / samples;
    if (!(v.d2(x) > 0)) return false;
    if (v.kind == BarrierKind::growth) {
      if (v.value(x) < 0) return false;
    } else {
      if (x <= v.x0 && v.value(x) < 0) return false;
      if (x >= v.x0 && v.value(x) > 0) return false;
    }
  }
  if (v.kind == BarrierKind::growth) return v.value(0) == 0 && v.d1(0) == 0;
  return v.value(v.x0) == 0;
}

}  // namespace eigmeans::odecmp
