#pragma once

// Model manifolds whose geodesic-ball volume depends only on the radius:
// the flat torus t2 = R^2 / (2 pi Z)^2, the round spheres s2 and s3, and a
// Euclidean patch e2 used for oracles. Radial volume geometry, geodesic
// sphere quadrature, closed-form eigenfunctions and L2 norms.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/bernoulli.hpp>

#include "eigmeans/quadrature.hpp"
#include "eigmeans/specialfun.hpp"

namespace eigmeans::manifold {

namespace detail {

// Coefficients a_j of cot r - 1/r = sum_j a_j r^(2j-1), j >= 1.
template <class Real>
const std::vector<Real>& cot_series() {
  static const std::vector<Real> coeffs = [] {
    std::vector<Real> a;
    Real factorial = 2;  // (2j)!
    Real pow4 = 4;       // 2^(2j)
    for (int j = 1; j <= 64; ++j) {
      if (j > 1) {
        factorial *= Real(2 * j - 1) * Real(2 * j);
        pow4 *= 4;
      }
      const Real sign = (j % 2 == 0) ? 1 : -1;
      a.push_back(sign * pow4 * boost::math::bernoulli_b2n<Real>(j) / factorial);
    }
    return a;
  }();
  return coeffs;
}

// cot r - 1/r, accurate for small r.
template <class Real>
Real cot_minus_inverse(Real r) {
  using std::abs;
  using std::cos;
  using std::sin;
  if (abs(r) < Real(0.5)) {
    const auto& a = cot_series<Real>();
    const Real r2 = r * r;
    Real power = r;
    Real sum = 0;
    for (const Real& c : a) {
      const Real t = c * power;
      sum += t;
      if (abs(t) <= std::numeric_limits<Real>::epsilon() * abs(sum) * Real(0.125)) break;
      power *= r2;
    }
    return sum;
  }
  return cos(r) / sin(r) - 1 / r;
}

// d/dr (cot r - 1/r) = 1/r^2 - 1/sin^2 r.
template <class Real>
Real d_cot_minus_inverse(Real r) {
  using std::abs;
  using std::sin;
  if (abs(r) < Real(0.5)) {
    const auto& a = cot_series<Real>();
    const Real r2 = r * r;
    Real power = 1;
    Real sum = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      const Real t = Real(2 * j + 1) * a[j] * power;
      sum += t;
      if (abs(t) <= std::numeric_limits<Real>::epsilon() * abs(sum) * Real(0.125)) break;
      power *= r2;
    }
    return sum;
  }
  const Real s = sin(r);
  return 1 / (r * r) - 1 / (s * s);
}

}  // namespace detail

/// Radial volume data of a model manifold: h(r) is the measure of the
/// geodesic sphere of radius r, g = h'/h, c = g - (n-1)/r.
template <class Real = double>
class VolumeGeometry {
 public:
  enum class Kind { flat, round };

  static VolumeGeometry flat(int n, Real injectivity_radius) {
    return VolumeGeometry(Kind::flat, n, injectivity_radius);
  }
  /// Unit round sphere S^n.
  static VolumeGeometry round_sphere(int n) {
    return VolumeGeometry(Kind::round, n, specialfun::detail::pi<Real>());
  }

  Kind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return n_; }
  Real injectivity_radius() const noexcept { return r_inj_; }

  /// Largest radius used for spherical means: on spheres g = (n-1) cot r stays positive below pi/2.
  Real mean_radius_cap() const {
    using std::min;
    if (kind_ == Kind::round) return min(r_inj_, specialfun::detail::pi<Real>() / 2);
    return r_inj_;
  }

  Real h(Real r) const {
    using std::sin;
    const Real base = kind_ == Kind::flat ? r : sin(r);
    Real p = sphere_area_;
    for (int i = 0; i < n_ - 1; ++i) p *= base;
    return p;
  }

  Real g(Real r) const { return Real(n_ - 1) / r + c(r); }

  Real c(Real r) const {
    if (kind_ == Kind::flat) return 0;
    return Real(n_ - 1) * detail::cot_minus_inverse(r);
  }
  Real dc(Real r) const {
    if (kind_ == Kind::flat) return 0;
    return Real(n_ - 1) * detail::d_cot_minus_inverse(r);
  }

  /// k(r) = (n-1)/r - g(r) = -c(r); continuous with k(0) = 0.
  Real correction_k(Real r) const {
    if (!(r >= 0) || !(r < r_inj_)) throw std::domain_error("correction_k: radius out of range");
    return -c(r);
  }
  Real correction_k_derivative(Real r) const {
    if (!(r >= 0) || !(r < r_inj_)) throw std::domain_error("correction_k: radius out of range");
    return -dc(r);
  }

  /// Taylor coefficients of c(r) about 0 up to the given degree.
  std::vector<Real> correction_taylor(int degree) const {
    std::vector<Real> t(static_cast<std::size_t>(degree) + 1, Real(0));
    if (kind_ == Kind::flat) return t;
    const auto& a = detail::cot_series<Real>();
    for (int j = 1; 2 * j - 1 <= degree; ++j) {
      if (static_cast<std::size_t>(j) > a.size()) throw std::out_of_range("correction_taylor: degree too large");
      t[2 * j - 1] = Real(n_ - 1) * a[j - 1];
    }
    return t;
  }

  /// Volume of the geodesic ball of radius r.
  Real ball_volume(Real r) const {
    using std::cos;
    using std::sin;
    const Real pi = specialfun::detail::pi<Real>();
    if (kind_ == Kind::flat) {
      Real p = sphere_area_ / Real(n_);
      for (int i = 0; i < n_; ++i) p *= r;
      return p;
    }
    switch (n_) {
      case 2: return 2 * pi * (1 - cos(r));
      case 3: return 2 * pi * (r - sin(r) * cos(r));
      default: throw std::invalid_argument("ball_volume: closed form only for S^2 and S^3");
    }
  }

 private:
  VolumeGeometry(Kind kind, int n, Real r_inj) : kind_(kind), n_(n), r_inj_(r_inj) {
    if (n < 2 || n > 5) throw std::invalid_argument("VolumeGeometry: dimension must be 2..5");
    // Area of the unit sphere S^(n-1).
    const Real pi = specialfun::detail::pi<Real>();
    const Real areas[] = {2 * pi, 4 * pi, 2 * pi * pi, 8 * pi * pi / 3};
    sphere_area_ = areas[n - 2];
  }

  Kind kind_;
  int n_;
  Real r_inj_;
  Real sphere_area_{};
};

enum class ManifoldId { t2, s2, s3, e2 };

inline std::string to_string(ManifoldId id) {
  switch (id) {
    case ManifoldId::t2: return "t2";
    case ManifoldId::s2: return "s2";
    case ManifoldId::s3: return "s3";
    case ManifoldId::e2: return "e2";
  }
  return "?";
}

inline ManifoldId parse_manifold(std::string_view s) {
  if (s == "t2") return ManifoldId::t2;
  if (s == "s2") return ManifoldId::s2;
  if (s == "s3") return ManifoldId::s3;
  if (s == "e2") return ManifoldId::e2;
  throw std::invalid_argument("unknown manifold id '" + std::string(s) + "'");
}

using Vec = std::array<double, 4>;

/// A point in ambient coordinates: (x, y) for t2/e2, a unit vector of R^3 for
/// s2 and of R^4 for s3. Unused trailing components are zero.
struct Point {
  Vec c{};
  friend bool operator==(const Point&, const Point&) = default;
};

inline double dot(const Vec& a, const Vec& b) {
  return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

inline Point s2_point(double theta, double phi) {
  return {{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta), 0.0}};
}

/// Hyperspherical coordinates: chi is the distance from the north pole (0,0,0,1).
inline Point s3_point(double chi, double theta, double phi) {
  const double s = std::sin(chi);
  return {{s * std::sin(theta) * std::cos(phi), s * std::sin(theta) * std::sin(phi), s * std::cos(theta),
           std::cos(chi)}};
}

inline Point flat_point(double x, double y) { return {{x, y, 0.0, 0.0}}; }

class ModelManifold {
 public:
  explicit ModelManifold(ManifoldId id) : id_(id), geometry_(make_geometry(id)) {}

  ManifoldId id() const noexcept { return id_; }
  std::string name() const { return to_string(id_); }
  int dimension() const noexcept { return id_ == ManifoldId::s3 ? 3 : 2; }
  int ambient_dimension() const noexcept {
    switch (id_) {
      case ManifoldId::s2: return 3;
      case ManifoldId::s3: return 4;
      default: return 2;
    }
  }
  bool is_sphere() const noexcept { return id_ == ManifoldId::s2 || id_ == ManifoldId::s3; }
  bool is_compact() const noexcept { return id_ != ManifoldId::e2; }

  const VolumeGeometry<double>& geometry() const noexcept { return geometry_; }
  double injectivity_radius() const noexcept { return geometry_.injectivity_radius(); }

  double total_volume() const {
    const double pi = std::numbers::pi;
    switch (id_) {
      case ManifoldId::t2: return 4 * pi * pi;
      case ManifoldId::s2: return 4 * pi;
      case ManifoldId::s3: return 2 * pi * pi;
      case ManifoldId::e2: return std::numeric_limits<double>::infinity();
    }
    return 0;
  }

  Point north_pole() const {
    switch (id_) {
      case ManifoldId::s2: return {{0, 0, 1, 0}};
      case ManifoldId::s3: return {{0, 0, 0, 1}};
      default: return flat_point(0, 0);
    }
  }

  /// Canonical representative: torus coordinates in [0, 2 pi), sphere points normalized.
  Point normalize(Point p) const {
    if (id_ == ManifoldId::t2) {
      for (int i = 0; i < 2; ++i) {
        p.c[i] = std::fmod(p.c[i], 2 * std::numbers::pi);
        if (p.c[i] < 0) p.c[i] += 2 * std::numbers::pi;
      }
    } else if (is_sphere()) {
      const double norm = std::sqrt(dot(p.c, p.c));
      for (double& v : p.c) v /= norm;
    }
    return p;
  }

  double distance(const Point& a, const Point& b) const {
    if (is_sphere()) {
      const double cosine = dot(a.c, b.c);
      Vec perp{};
      for (int i = 0; i < 4; ++i) perp[i] = b.c[i] - cosine * a.c[i];
      return std::atan2(std::sqrt(dot(perp, perp)), cosine);
    }
    double sq = 0;
    for (int i = 0; i < 2; ++i) {
      double d = b.c[i] - a.c[i];
      if (id_ == ManifoldId::t2) d = std::remainder(d, 2 * std::numbers::pi);
      sq += d * d;
    }
    return std::sqrt(sq);
  }

  /// exp_p(v) for a tangent vector v (orthogonal to p on spheres).
  Point exp_map(const Point& p, const Vec& v) const {
    if (is_sphere()) {
      const double len = std::sqrt(dot(v, v));
      if (len == 0) return p;
      Point q;
      for (int i = 0; i < 4; ++i) q.c[i] = std::cos(len) * p.c[i] + std::sin(len) * v[i] / len;
      return q;
    }
    Point q = p;
    q.c[0] += v[0];
    q.c[1] += v[1];
    return id_ == ManifoldId::t2 ? normalize(q) : q;
  }

  /// Orthonormal basis of the tangent space at p.
  std::vector<Vec> tangent_frame(const Point& p) const {
    const int d = dimension();
    std::vector<Vec> frame;
    if (!is_sphere()) {
      frame.push_back({1, 0, 0, 0});
      frame.push_back({0, 1, 0, 0});
      return frame;
    }
    const int amb = ambient_dimension();
    std::vector<Vec> basis{p.c};
    // Gram-Schmidt on the coordinate axes, least aligned with p first.
    std::vector<int> axes(amb);
    for (int i = 0; i < amb; ++i) axes[i] = i;
    std::sort(axes.begin(), axes.end(), [&](int a, int b) { return std::abs(p.c[a]) < std::abs(p.c[b]); });
    for (int axis : axes) {
      if (static_cast<int>(frame.size()) == d) break;
      Vec v{};
      v[axis] = 1;
      for (const Vec& b : basis) {
        const double proj = dot(v, b);
        for (int i = 0; i < 4; ++i) v[i] -= proj * b[i];
      }
      const double len = std::sqrt(dot(v, v));
      if (len < 1e-8) continue;
      for (double& x : v) x /= len;
      basis.push_back(v);
      frame.push_back(v);
    }
    return frame;
  }

  Point random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (is_sphere()) {
      std::normal_distribution<double> gauss;
      Point p;
      for (int i = 0; i < ambient_dimension(); ++i) p.c[i] = gauss(rng);
      return normalize(p);
    }
    const double span = 2 * std::numbers::pi;
    const double offset = id_ == ManifoldId::e2 ? -std::numbers::pi : 0.0;
    return flat_point(offset + span * unit(rng), offset + span * unit(rng));
  }

 private:
  static VolumeGeometry<double> make_geometry(ManifoldId id) {
    switch (id) {
      case ManifoldId::t2: return VolumeGeometry<double>::flat(2, std::numbers::pi);
      case ManifoldId::e2: return VolumeGeometry<double>::flat(2, std::numeric_limits<double>::infinity());
      case ManifoldId::s2: return VolumeGeometry<double>::round_sphere(2);
      case ManifoldId::s3: return VolumeGeometry<double>::round_sphere(3);
    }
    throw std::invalid_argument("unknown manifold id");
  }

  ManifoldId id_;
  VolumeGeometry<double> geometry_;
};

/// The radial geometry of a model in any scalar type.
template <class Real = double>
VolumeGeometry<Real> volume_geometry(ManifoldId id) {
  switch (id) {
    case ManifoldId::t2: return VolumeGeometry<Real>::flat(2, specialfun::detail::pi<Real>());
    case ManifoldId::e2: return VolumeGeometry<Real>::flat(2, std::numeric_limits<Real>::infinity());
    case ManifoldId::s2: return VolumeGeometry<Real>::round_sphere(2);
    case ManifoldId::s3: return VolumeGeometry<Real>::round_sphere(3);
  }
  throw std::invalid_argument("unknown manifold id");
}

inline ModelManifold make_manifold(ManifoldId id) { return ModelManifold(id); }
inline ModelManifold make_manifold(std::string_view id) { return ModelManifold(parse_manifold(id)); }

// ---------------------------------------------------------------------------
// Eigenfunctions

/// Rotation-invariant harmonic about a pole (s2: P_l, s3: U_l/(l+1)).
struct Zonal {
  int ell = 0;
  std::optional<Point> pole;
};
/// cos(k . x + phase) on t2.
struct Frequency {
  std::array<int, 2> k{};
  double phase = 0;
};
struct TrigTerm {
  double coefficient = 1;
  std::array<int, 2> k{};
  double phase = 0;
};
/// Sum of t2 frequencies sharing |k|.
struct TrigCombination {
  std::vector<TrigTerm> terms;
};
/// J0(lambda |x - center|) on e2, the flat counterpart of a zonal harmonic.
struct Radial {
  double lambda = 0;
  Point center{};
};

using EigenSpec = std::variant<Zonal, Frequency, TrigCombination, Radial>;

class Eigenfunction {
 public:
  double lambda() const noexcept { return lambda_; }
  ManifoldId manifold() const noexcept { return manifold_; }
  bool is_constant() const noexcept { return lambda_ == 0; }
  const EigenSpec& spec() const noexcept { return spec_; }

  /// "zonal" or "freq" (single frequency or combination).
  std::string family() const {
    return (std::holds_alternative<Zonal>(spec_) || std::holds_alternative<Radial>(spec_)) ? "zonal" : "freq";
  }

  /// Degree l for zonal families, "kx:ky" for torus frequencies.
  std::string index_label() const {
    if (const auto* z = std::get_if<Zonal>(&spec_)) return std::to_string(z->ell);
    if (const auto* f = std::get_if<Frequency>(&spec_)) {
      return std::to_string(f->k[0]) + ":" + std::to_string(f->k[1]);
    }
    if (const auto* t = std::get_if<TrigCombination>(&spec_)) {
      std::string s;
      for (const auto& term : t->terms) {
        if (!s.empty()) s += "+";
        s += std::to_string(term.k[0]) + ":" + std::to_string(term.k[1]);
      }
      return s;
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", std::get<Radial>(spec_).lambda);
    return buf;
  }

  double operator()(const Point& p) const {
    return std::visit([&](const auto& s) { return eval(s, p); }, spec_);
  }

  /// ||psi||_{L2(M)} from orthogonality relations; empty for e2.
  std::optional<double> closed_form_l2_norm() const {
    const double pi = std::numbers::pi;
    if (const auto* z = std::get_if<Zonal>(&spec_)) {
      if (manifold_ == ManifoldId::s2) return std::sqrt(4 * pi / (2 * z->ell + 1));
      return std::sqrt(2 * pi * pi) / (z->ell + 1);
    }
    if (const auto* f = std::get_if<Frequency>(&spec_)) {
      if (f->k[0] == 0 && f->k[1] == 0) return 2 * pi * std::abs(std::cos(f->phase));
      return pi * std::sqrt(2.0);
    }
    if (const auto* t = std::get_if<TrigCombination>(&spec_)) {
      // Merge +k and -k into one complex amplitude per frequency.
      std::map<std::array<int, 2>, std::complex<double>> amp;
      for (const auto& term : t->terms) {
        auto k = term.k;
        double phase = term.phase;
        if (k[0] < 0 || (k[0] == 0 && k[1] < 0)) {
          k = {-k[0], -k[1]};
          phase = -phase;
        }
        amp[k] += std::polar(term.coefficient, phase);
      }
      double sq = 0;
      for (const auto& [k, a] : amp) {
        sq += (k[0] == 0 && k[1] == 0) ? 4 * pi * pi * a.real() * a.real() : 2 * pi * pi * std::norm(a);
      }
      return std::sqrt(sq);
    }
    return std::nullopt;
  }

 private:
  friend Eigenfunction eigenfunction(const ModelManifold&, const EigenSpec&);
  Eigenfunction(ManifoldId m, EigenSpec spec, double lambda, Point pole)
      : manifold_(m), spec_(std::move(spec)), lambda_(lambda), pole_(pole) {}

  double eval(const Zonal& z, const Point& p) const {
    const double t = std::clamp(dot(pole_.c, p.c), -1.0, 1.0);
    if (manifold_ == ManifoldId::s2) return specialfun::legendre(z.ell, t);
    // sin((l+1) theta) / ((l+1) sin theta) = U_l(cos theta) / (l+1).
    double u_prev = 1;
    if (z.ell == 0) return 1;
    double u = 2 * t;
    for (int k = 1; k < z.ell; ++k) {
      const double next = 2 * t * u - u_prev;
      u_prev = u;
      u = next;
    }
    return u / (z.ell + 1);
  }
  static double eval(const Frequency& f, const Point& p) {
    return std::cos(f.k[0] * p.c[0] + f.k[1] * p.c[1] + f.phase);
  }
  static double eval(const TrigCombination& t, const Point& p) {
    double s = 0;
    for (const auto& term : t.terms) s += term.coefficient * std::cos(term.k[0] * p.c[0] + term.k[1] * p.c[1] + term.phase);
    return s;
  }
  double eval(const Radial& r, const Point& p) const {
    const double d = std::hypot(p.c[0] - r.center.c[0], p.c[1] - r.center.c[1]);
    return specialfun::bessel_j(specialfun::BesselOrder::from_twice(0), r.lambda * d);
  }

  ManifoldId manifold_;
  EigenSpec spec_;
  double lambda_;
  Point pole_;
};

/// Builds a catalog eigenfunction (-Delta psi = lambda^2 psi) on the manifold.
inline Eigenfunction eigenfunction(const ModelManifold& m, const EigenSpec& spec) {
  const ManifoldId id = m.id();
  if (const auto* z = std::get_if<Zonal>(&spec)) {
    if (!m.is_sphere()) throw std::invalid_argument("zonal eigenfunctions need s2 or s3");
    if (z->ell < 0) throw std::invalid_argument("zonal degree must be >= 0");
    const Point pole = z->pole ? m.normalize(*z->pole) : m.north_pole();
    const double l = z->ell;
    const double lambda = id == ManifoldId::s2 ? std::sqrt(l * (l + 1)) : std::sqrt(l * (l + 2));
    return Eigenfunction(id, spec, lambda, pole);
  }
  if (const auto* f = std::get_if<Frequency>(&spec)) {
    if (id != ManifoldId::t2) throw std::invalid_argument("frequency eigenfunctions need t2");
    return Eigenfunction(id, spec, std::hypot(f->k[0], f->k[1]), Point{});
  }
  if (const auto* t = std::get_if<TrigCombination>(&spec)) {
    if (id != ManifoldId::t2) throw std::invalid_argument("trig combinations need t2");
    if (t->terms.empty()) throw std::invalid_argument("trig combination has no terms");
    const int norm2 = t->terms.front().k[0] * t->terms.front().k[0] + t->terms.front().k[1] * t->terms.front().k[1];
    for (const auto& term : t->terms) {
      if (term.k[0] * term.k[0] + term.k[1] * term.k[1] != norm2) {
        throw std::invalid_argument("trig combination is not an eigenfunction: |k| differs between terms");
      }
    }
    return Eigenfunction(id, spec, std::sqrt(double(norm2)), Point{});
  }
  const auto& r = std::get<Radial>(spec);
  if (id != ManifoldId::e2) throw std::invalid_argument("radial Bessel eigenfunctions need e2");
  if (!(r.lambda >= 0)) throw std::invalid_argument("radial eigenfunction needs lambda >= 0");
  return Eigenfunction(id, spec, r.lambda, r.center);
}

// ---------------------------------------------------------------------------
// Geodesic spheres

struct GeodesicSphereQuadrature {
  Point center;
  double radius = 0;
  std::vector<Point> nodes;
  std::vector<double> weights;
};

/// Quadrature on the geodesic sphere of radius r about center, weights summing to h(r).
/// Two-dimensional models use m equally spaced nodes (trapezoid rule); s3 uses an
/// m x m/2 product of the trapezoid rule in azimuth and Fejer's rule in cos(polar).
inline GeodesicSphereQuadrature geodesic_sphere(const ModelManifold& m, const Point& center, double r, int nodes) {
  if (!(r > 0)) throw std::domain_error("geodesic_sphere: radius must be positive");
  if (!(r < m.injectivity_radius())) throw std::domain_error("geodesic_sphere: radius must be below the injectivity radius");
  if (nodes < 16) throw std::invalid_argument("geodesic_sphere: need at least 16 nodes");
  GeodesicSphereQuadrature q;
  q.center = m.normalize(center);
  q.radius = r;
  const double h = m.geometry().h(r);
  const double two_pi = 2 * std::numbers::pi;
  if (m.dimension() == 2) {
    q.nodes.reserve(nodes);
    q.weights.assign(nodes, h / nodes);
    if (m.is_sphere()) {
      const auto frame = m.tangent_frame(q.center);
      for (int j = 0; j < nodes; ++j) {
        const double phi = two_pi * j / nodes;
        Vec v{};
        for (int i = 0; i < 4; ++i) v[i] = r * (std::cos(phi) * frame[0][i] + std::sin(phi) * frame[1][i]);
        q.nodes.push_back(m.exp_map(q.center, v));
      }
    } else {
      for (int j = 0; j < nodes; ++j) {
        const double phi = two_pi * j / nodes;
        Point p = q.center;
        p.c[0] += r * std::cos(phi);
        p.c[1] += r * std::sin(phi);
        q.nodes.push_back(m.id() == ManifoldId::t2 ? m.normalize(p) : p);
      }
    }
    return q;
  }
  const int azimuth = nodes;
  const int polar = nodes / 2;
  const auto fejer = quad::fejer1<double>(polar);
  const auto frame = m.tangent_frame(q.center);
  const double scale = h / (4 * std::numbers::pi);
  q.nodes.reserve(static_cast<std::size_t>(azimuth) * polar);
  for (int a = 0; a < polar; ++a) {
    const double ct = fejer.nodes[a];
    const double st = std::sqrt(std::max(0.0, 1 - ct * ct));
    for (int b = 0; b < azimuth; ++b) {
      const double phi = two_pi * b / azimuth;
      Vec v{};
      for (int i = 0; i < 4; ++i) {
        v[i] = r * (st * std::cos(phi) * frame[0][i] + st * std::sin(phi) * frame[1][i] + ct * frame[2][i]);
      }
      q.nodes.push_back(m.exp_map(q.center, v));
      q.weights.push_back(scale * fejer.weights[a] * two_pi / azimuth);
    }
  }
  return q;
}

/// k(r) = (n-1)/r - g(r) for the manifold.
inline double correction_k(const ModelManifold& m, double r) {
  if (!(r > 0) || !(r < m.injectivity_radius())) throw std::domain_error("correction_k: radius out of range");
  return m.geometry().correction_k(r);
}

// ---------------------------------------------------------------------------
// L2 norms

/// ||f||_{L2(M)} by tensor-product quadrature with the given resolution
/// (Gauss-Legendre in polar variables, trapezoid in periodic ones).
template <class F>
double l2_norm(const ModelManifold& m, const F& f, int resolution) {
  if (resolution < 4) throw std::invalid_argument("l2_norm: resolution too small");
  if (!m.is_compact()) throw std::invalid_argument("l2_norm: e2 is not compact");
  const double pi = std::numbers::pi;
  double sum = 0;
  if (m.id() == ManifoldId::t2) {
    const double cell = 2 * pi / resolution;
    for (int i = 0; i < resolution; ++i) {
      for (int j = 0; j < resolution; ++j) {
        const double v = f(flat_point(i * cell, j * cell));
        sum += v * v;
      }
    }
    return std::sqrt(sum * cell * cell);
  }
  const auto gl = quad::gauss_legendre<double>(resolution);
  const int azimuth = 2 * resolution;
  const double dphi = 2 * pi / azimuth;
  if (m.id() == ManifoldId::s2) {
    for (int a = 0; a < resolution; ++a) {
      const double theta = std::acos(gl.nodes[a]);
      for (int b = 0; b < azimuth; ++b) {
        const double v = f(s2_point(theta, b * dphi));
        sum += gl.weights[a] * dphi * v * v;
      }
    }
    return std::sqrt(sum);
  }
  // s3: dvol = sin^2 chi d chi d(cos theta) d phi.
  for (int c = 0; c < resolution; ++c) {
    const double chi = pi / 2 * (gl.nodes[c] + 1);
    const double wchi = pi / 2 * gl.weights[c] * std::sin(chi) * std::sin(chi);
    for (int a = 0; a < resolution; ++a) {
      const double theta = std::acos(gl.nodes[a]);
      for (int b = 0; b < azimuth; ++b) {
        const double v = f(s3_point(chi, theta, b * dphi));
        sum += wchi * gl.weights[a] * dphi * v * v;
      }
    }
  }
  return std::sqrt(sum);
}

/// Closed-form fast path for catalog eigenfunctions.
inline double l2_norm(const ModelManifold& m, const Eigenfunction& psi) {
  if (psi.manifold() != m.id()) throw std::invalid_argument("l2_norm: eigenfunction lives on another manifold");
  if (auto n = psi.closed_form_l2_norm()) return *n;
  throw std::invalid_argument("l2_norm: no closed form on a non-compact manifold");
}

/// Laplace-Beltrami operator at p by second differences along geodesics in
/// an orthonormal frame; O(step^2).
template <class F>
double discrete_laplacian(const ModelManifold& m, const F& f, const Point& p, double step) {
  const double centre = f(p);
  double sum = 0;
  for (const Vec& e : m.tangent_frame(p)) {
    Vec plus{};
    Vec minus{};
    for (int i = 0; i < 4; ++i) {
      plus[i] = step * e[i];
      minus[i] = -step * e[i];
    }
    sum += (f(m.exp_map(p, plus)) - 2 * centre + f(m.exp_map(p, minus))) / (step * step);
  }
  return sum;
}

}  // namespace eigmeans::manifold
