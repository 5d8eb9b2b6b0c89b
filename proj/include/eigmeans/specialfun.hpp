#pragma once

// Bessel functions of order 0, 1/2, 1, 3/2, the radial fundamental pair of
// u'' + ((n-1)/x) u' + u = 0, Legendre polynomials and the profile v0.
//
// Everything here is a template on the scalar type so the same code runs in
// double and in boost::multiprecision quad precision.

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <boost/math/constants/constants.hpp>

namespace eigmeans::specialfun {

/// Order nu = (n-2)/2 of the Bessel functions attached to dimension n.
/// Stored as the integer 2*nu.
class BesselOrder {
 public:
  static BesselOrder from_twice(int twice_nu) {
    if (twice_nu < 0 || twice_nu > 3) {
      throw std::invalid_argument("unsupported Bessel order 2*nu=" + std::to_string(twice_nu) +
                                  " (supported: 0, 1/2, 1, 3/2)");
    }
    return BesselOrder(twice_nu);
  }
  static BesselOrder for_dimension(int n) {
    if (n < 2 || n > 5) {
      throw std::invalid_argument("unsupported dimension " + std::to_string(n) + " (supported: 2..5)");
    }
    return BesselOrder(n - 2);
  }

  int twice() const noexcept { return twice_nu_; }
  bool is_integer() const noexcept { return twice_nu_ % 2 == 0; }
  double value() const noexcept { return 0.5 * twice_nu_; }

  friend bool operator==(BesselOrder a, BesselOrder b) noexcept { return a.twice_nu_ == b.twice_nu_; }

 private:
  explicit BesselOrder(int twice_nu) : twice_nu_(twice_nu) {}
  int twice_nu_;
};

/// Power series are used up to this argument, the Hankel expansion beyond.
inline constexpr double kSeriesCrossover = 12.0;

namespace detail {

template <class Real>
Real pi() {
  return boost::math::constants::pi<Real>();
}

template <class Real>
Real euler_gamma() {
  return boost::math::constants::euler<Real>();
}

template <class Real>
Real eps() {
  return std::numeric_limits<Real>::epsilon();
}

// x^(twice/2) for x >= 0.
template <class Real>
Real half_power(Real x, int twice) {
  using std::sqrt;
  Real r = 1;
  for (int i = 0; i < twice / 2; ++i) r *= x;
  if (twice % 2 != 0) r *= sqrt(x);
  return r;
}

// Gamma(nu + 1) for nu = twice/2.
template <class Real>
Real gamma_nu_plus_one(int twice) {
  using std::sqrt;
  Real g = (twice % 2 == 0) ? Real(1) : sqrt(pi<Real>()) / 2;  // Gamma(1) or Gamma(3/2)
  for (int t = (twice % 2 == 0) ? 2 : 3; t <= twice; t += 2) g *= Real(t) / 2;
  return g;
}

// x^(-nu) J_nu(x) by its power series; entire and equal to 2^-nu/Gamma(nu+1) at 0.
template <class Real>
Real scaled_j_series(int twice, Real x) {
  using std::abs;
  const Real nu = Real(twice) / 2;
  const Real q = -(x * x) / 4;
  Real term = 1 / (half_power(Real(2), twice) * gamma_nu_plus_one<Real>(twice));
  Real sum = term;
  for (int m = 1; m < 500; ++m) {
    term *= q / (Real(m) * (Real(m) + nu));
    sum += term;
    if (abs(term) <= eps<Real>() * abs(sum) * Real(0.25) && m > 2) break;
  }
  return sum;
}

// Hankel asymptotic amplitudes P, Q for large x.
template <class Real>
std::pair<Real, Real> hankel_pq(int twice, Real x) {
  using std::abs;
  const Real mu = Real(twice * twice);
  Real p = 1;
  Real q = 0;
  Real term = 1;
  Real prev = std::numeric_limits<Real>::max();
  for (int k = 1; k < 200; ++k) {
    const Real odd = Real(2 * k - 1);
    term *= (mu - odd * odd) / (Real(8 * k) * x);
    const Real mag = abs(term);
    if (mag == 0) break;
    if (mag > prev) break;  // asymptotic series started to diverge
    prev = mag;
    switch (k % 4) {
      case 1: q += term; break;
      case 2: p -= term; break;
      case 3: q -= term; break;
      default: p += term; break;
    }
    if (mag < eps<Real>() * Real(1e-3)) break;
  }
  return {p, q};
}

template <class Real>
std::pair<Real, Real> hankel_jy(int twice, Real x) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const auto [p, q] = hankel_pq(twice, x);
  const Real chi = x - Real(twice + 1) * pi<Real>() / 4;
  const Real amp = sqrt(2 / (pi<Real>() * x));
  return {amp * (p * cos(chi) - q * sin(chi)), amp * (p * sin(chi) + q * cos(chi))};
}

// J_nu for 2*nu in 0..5 (internal; orders above 3/2 feed derivatives).
template <class Real>
Real j_any(int twice, Real x) {
  if (x <= Real(kSeriesCrossover)) return half_power(x, twice) * scaled_j_series(twice, x);
  return hankel_jy(twice, x).first;
}

template <class Real>
Real scaled_j_any(int twice, Real x) {
  if (x <= Real(kSeriesCrossover)) return scaled_j_series(twice, x);
  return hankel_jy(twice, x).first / half_power(x, twice);
}

// Y_0 from the logarithmic series.
template <class Real>
Real y0_series(Real x) {
  using std::abs;
  using std::log;
  const Real q = (x * x) / 4;
  Real term = 1;  // (x^2/4)^m / (m!)^2
  Real harmonic = 0;
  Real tail = 0;
  for (int m = 1; m < 500; ++m) {
    term *= q / (Real(m) * Real(m));
    harmonic += Real(1) / Real(m);
    const Real t = (m % 2 == 1 ? 1 : -1) * harmonic * term;
    tail += t;
    if (abs(t) <= eps<Real>() * abs(tail) * Real(0.25) && m > 2) break;
  }
  const Real two_over_pi = 2 / pi<Real>();
  return two_over_pi * ((log(x / 2) + euler_gamma<Real>()) * scaled_j_series(0, x) + tail);
}

// Y_1 from the logarithmic series.
template <class Real>
Real y1_series(Real x) {
  using std::abs;
  using std::log;
  const Real half = x / 2;
  const Real q = -(half * half);
  const Real gamma = euler_gamma<Real>();
  Real term = half;  // (-1)^k (x/2)^(2k+1) / (k! (k+1)!)
  Real h_k = 0;
  Real h_k1 = 1;
  Real sum = (-gamma + h_k - gamma + h_k1) * term;
  for (int k = 1; k < 500; ++k) {
    term *= q / (Real(k) * Real(k + 1));
    h_k += Real(1) / Real(k);
    h_k1 += Real(1) / Real(k + 1);
    const Real t = (h_k + h_k1 - 2 * gamma) * term;
    sum += t;
    if (abs(t) <= eps<Real>() * abs(sum) * Real(0.25) && k > 2) break;
  }
  const Real j1 = x * scaled_j_series(2, x);
  return -2 / (pi<Real>() * x) + 2 / pi<Real>() * log(half) * j1 - sum / pi<Real>();
}

// Spherical-Bessel closed forms for half-integer orders 1/2, 3/2, 5/2.
template <class Real>
Real j_half_closed(int twice, Real x) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Real a = sqrt(2 / (pi<Real>() * x));
  const Real s = sin(x);
  const Real c = cos(x);
  switch (twice) {
    case 1: return a * s;
    case 3: return a * (s / x - c);
    case 5: return a * ((3 / (x * x) - 1) * s - 3 * c / x);
    default: throw std::invalid_argument("j_half_closed: order not half-integer <= 5/2");
  }
}

template <class Real>
Real y_half_closed(int twice, Real x) {
  using std::cos;
  using std::sin;
  using std::sqrt;
  const Real a = sqrt(2 / (pi<Real>() * x));
  const Real s = sin(x);
  const Real c = cos(x);
  switch (twice) {
    case 1: return -a * c;
    case 3: return -a * (c / x + s);
    case 5: return a * ((1 - 3 / (x * x)) * c - 3 * s / x);
    default: throw std::invalid_argument("y_half_closed: order not half-integer <= 5/2");
  }
}

// Y_nu for 2*nu in 0..5, x > 0.
template <class Real>
Real y_any(int twice, Real x) {
  if (twice % 2 == 1) return y_half_closed(twice, x);
  const bool series = x <= Real(kSeriesCrossover);
  switch (twice) {
    case 0: return series ? y0_series(x) : hankel_jy(0, x).second;
    case 2: return series ? y1_series(x) : hankel_jy(2, x).second;
    case 4: {
      const Real y0 = series ? y0_series(x) : hankel_jy(0, x).second;
      const Real y1 = series ? y1_series(x) : hankel_jy(2, x).second;
      return 2 / x * y1 - y0;
    }
    default: throw std::invalid_argument("y_any: unsupported order");
  }
}

}  // namespace detail

/// J_nu(x) for x >= 0.
template <class Real = double>
Real bessel_j(BesselOrder order, Real x) {
  if (!(x >= 0)) throw std::domain_error("bessel_j: x must be >= 0");
  return detail::j_any(order.twice(), x);
}

/// Y_nu(x) for x > 0. Integer orders use the logarithmic series (Hankel
/// expansion past the crossover), half-integer orders the closed forms.
template <class Real = double>
Real bessel_y(BesselOrder order, Real x) {
  if (!(x > 0)) throw std::domain_error("bessel_y: x must be > 0 (Y is singular at 0)");
  return detail::y_any(order.twice(), x);
}

/// Independent radial solutions of u'' + ((n-1)/x) u' + u = 0:
///   y1(x) = x^-nu J_nu(x),  y2(x) = x^-nu Y_nu(x),  nu = (n-2)/2,
/// with W(y1, y2)(x) = (2/pi) x^(1-n).
///
/// The *_over_wronskian members return y_i / W in factored form,
/// (pi/2) x^(nu+1) J_nu and (pi/2) x^(nu+1) Y_nu, so they stay bounded at 0.
template <class Real = double>
class FundamentalPair {
 public:
  explicit FundamentalPair(int n) : n_(n), order_(BesselOrder::for_dimension(n)) {}

  int dimension() const noexcept { return n_; }
  BesselOrder order() const noexcept { return order_; }

  Real y1(Real x) const { return detail::scaled_j_any(twice(), check_nonneg(x)); }
  Real dy1(Real x) const { return -check_nonneg(x) * detail::scaled_j_any(twice() + 2, x); }

  Real y2(Real x) const {
    check_pos(x);
    return detail::y_any(twice(), x) / detail::half_power(x, twice());
  }
  Real dy2(Real x) const {
    check_pos(x);
    return -detail::y_any(twice() + 2, x) / detail::half_power(x, twice());
  }

  /// y1 y2' - y1' y2 assembled from the four components.
  Real wronskian(Real x) const { return y1(x) * dy2(x) - dy1(x) * y2(x); }

  /// The constant x^(n-1) W(x) = 2/pi.
  Real scaled_wronskian() const { return 2 / detail::pi<Real>(); }

  Real y1_over_wronskian(Real x) const {
    check_nonneg(x);
    return detail::pi<Real>() / 2 * detail::half_power(x, twice() + 2) * detail::j_any(twice(), x);
  }
  Real y2_over_wronskian(Real x) const {
    if (x == 0) return 0;
    check_pos(x);
    return detail::pi<Real>() / 2 * detail::half_power(x, twice() + 2) * detail::y_any(twice(), x);
  }

  /// d/dx (y1/W) = (pi/2) [ (2nu+1) x^nu J_nu + x^(nu+1) J_nu' ] rewritten with J_{nu+1}.
  Real d_y1_over_wronskian(Real x) const {
    check_nonneg(x);
    const Real x2nu = detail::half_power(x, 2 * twice());
    return detail::pi<Real>() / 2 * x2nu * (Real(twice() + 1) * y1(x) + x * dy1(x));
  }
  /// d/dx (y2/W); log-singular at 0 when n = 2, so callers weight it by k(eps t) -> 0.
  Real d_y2_over_wronskian(Real x) const {
    check_pos(x);
    const Real xnu = detail::half_power(x, twice());
    return detail::pi<Real>() / 2 *
           (Real(twice() + 1) * xnu * detail::y_any(twice(), x) - xnu * x * detail::y_any(twice() + 2, x));
  }

 private:
  int twice() const noexcept { return order_.twice(); }
  static Real check_nonneg(Real x) {
    if (!(x >= 0)) throw std::domain_error("fundamental pair: x must be >= 0");
    return x;
  }
  static void check_pos(Real x) {
    if (!(x > 0)) throw std::domain_error("fundamental pair: y2 is singular at x = 0");
  }

  int n_;
  BesselOrder order_;
};

/// P_l(t) by the upward three-term recurrence.
template <class Real = double>
Real legendre(int l, Real t) {
  using std::abs;
  if (l < 0) throw std::invalid_argument("legendre: degree must be >= 0");
  if (!(abs(t) <= 1)) throw std::domain_error("legendre: |t| must be <= 1");
  Real p_prev = 1;
  if (l == 0) return p_prev;
  Real p = t;
  for (int k = 1; k < l; ++k) {
    const Real next = (Real(2 * k + 1) * t * p - Real(k) * p_prev) / Real(k + 1);
    p_prev = p;
    p = next;
  }
  return p;
}

/// (P_l(t), P_l'(t)); used by the Gauss-Legendre node solver.
template <class Real = double>
std::pair<Real, Real> legendre_with_derivative(int l, Real t) {
  Real p_prev = 1;
  if (l == 0) return {Real(1), Real(0)};
  Real p = t;
  for (int k = 1; k < l; ++k) {
    const Real next = (Real(2 * k + 1) * t * p - Real(k) * p_prev) / Real(k + 1);
    p_prev = p;
    p = next;
  }
  // P_l' = l (t P_l - P_{l-1}) / (t^2 - 1); not used at t = +-1.
  return {p, Real(l) * (t * p - p_prev) / (t * t - 1)};
}

/// The solution of v'' + ((n-1)/rho) v' + v = 0, v(0) = 1, v'(0) = 0,
/// i.e. y1 normalized to 1 at the origin. n = 2 gives J0, n = 3 gives sin(rho)/rho.
template <class Real = double>
Real v0_profile(int n, Real rho) {
  const auto order = BesselOrder::for_dimension(n);
  if (!(rho >= 0)) throw std::domain_error("v0_profile: rho must be >= 0");
  const int twice = order.twice();
  return detail::scaled_j_any(twice, rho) * detail::half_power(Real(2), twice) *
         detail::gamma_nu_plus_one<Real>(twice);
}

template <class Real = double>
Real v0_derivative(int n, Real rho) {
  const auto order = BesselOrder::for_dimension(n);
  if (!(rho >= 0)) throw std::domain_error("v0_derivative: rho must be >= 0");
  const int twice = order.twice();
  return -rho * detail::scaled_j_any(twice + 2, rho) * detail::half_power(Real(2), twice) *
         detail::gamma_nu_plus_one<Real>(twice);
}

}  // namespace eigmeans::specialfun
