#pragma once

// Sweeps over eigenfunction families measuring the sup-norm (Hormander)
// ratio, restriction ratios on geodesic spheres of radius kappa/lambda, and
// the mean-value inequality linking them; CSV/JSON reports and the full
// verification suite.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "eigmeans/manifold.hpp"
#include "eigmeans/means.hpp"
#include "eigmeans/odecmp.hpp"
#include "eigmeans/perturb.hpp"
#include "eigmeans/specialfun.hpp"

namespace eigmeans::experiment {

using nlohmann::json;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Config {
  std::string manifold = "s2";
  std::string family = "zonal";
  int lmin = 1;
  int lmax = 200;  // degree for zonal families, |k| for torus frequencies
  double kappa = 1.0;
  double p = 2.0;
  int order = 3;
  int nodes = 0;  // 0: automatic
  std::optional<manifold::Point> center;

  void validate() const {
    const auto id = manifold::parse_manifold(manifold);
    if (id == manifold::ManifoldId::e2) throw ConfigError("e2 is an oracle patch, not a sweep manifold");
    if (family != "zonal" && family != "freq") throw ConfigError("family must be zonal or freq");
    if (id == manifold::ManifoldId::t2 && family != "freq") throw ConfigError("t2 supports the freq family");
    if (id != manifold::ManifoldId::t2 && family != "zonal") throw ConfigError("s2/s3 support the zonal family");
    if (lmin < 0 || lmax < 0) throw ConfigError("index bounds must be >= 0");
    if (!(kappa > 0)) throw ConfigError("kappa must be positive");
    if (!(p >= 2)) throw ConfigError("p must be >= 2");
    if (order < 0 || order > 12) throw ConfigError("order must be in 0..12");
    if (nodes != 0 && nodes < 16) throw ConfigError("nodes must be >= 16");
  }

  json to_json() const {
    json j{{"manifold", manifold}, {"family", family}, {"lmin", lmin}, {"lmax", lmax}, {"kappa", kappa},
           {"p", p},           {"order", order},   {"nodes", nodes}};
    if (center) j["center"] = center->c;
    return j;
  }
};

struct ExperimentRecord {
  std::string manifold;
  std::string family;
  std::string index;
  std::vector<int> sort_key;
  double lambda = 0;
  double kappa = 0;
  double p = 2;
  double hormander_ratio = 0;
  double restriction_ratio = 0;
  double equiv_ratio = 0;
  double half_bound_margin = 0;
  // Report-only quantities.
  double sup_norm = 0;
  double l2_norm = 0;
  double radius = 0;
  double sphere_measure = 0;
  double sphere_l2 = 0;
  double sphere_lp = 0;
  double normalized_restriction_ratio = 0;
  double reconstructed_constant = 0;
  double sphere_half_bound_margin = 0;
  bool plateau = false;
  manifold::Point center;
};

inline bool record_less(const ExperimentRecord& a, const ExperimentRecord& b) {
  return std::tie(a.manifold, a.family, a.sort_key) < std::tie(b.manifold, b.family, b.sort_key);
}

/// Catalog members of a sweep. Zonal: degrees lmin..lmax (degree 0 is the
/// constant and is excluded). Torus: one frequency k = (a, b), a >= b >= 0,
/// per symmetry class with lmin <= |k| <= lmax.
inline std::vector<manifold::Eigenfunction> sweep_family(const manifold::ModelManifold& m, const Config& c,
                                                         std::vector<std::string>* warnings = nullptr) {
  std::vector<manifold::Eigenfunction> out;
  if (m.id() == manifold::ManifoldId::t2) {
    for (int a = 0; a <= c.lmax; ++a) {
      for (int b = 0; b <= a; ++b) {
        const int n2 = a * a + b * b;
        if (n2 == 0) continue;
        if (n2 < c.lmin * c.lmin || n2 > c.lmax * c.lmax) continue;
        out.push_back(manifold::eigenfunction(m, manifold::Frequency{{a, b}, 0.0}));
      }
    }
  } else {
    for (int l = std::max(c.lmin, 0); l <= c.lmax; ++l) {
      if (l == 0) {
        if (warnings) warnings->push_back("constant eigenfunction (l = 0) excluded: lambda^((n-1)/2) normalization undefined");
        continue;
      }
      out.push_back(manifold::eigenfunction(m, manifold::Zonal{l, std::nullopt}));
    }
  }
  if (out.empty() && warnings) warnings->push_back("empty index range for " + m.name() + " " + c.family);
  return out;
}

inline int coarse_size(const manifold::ModelManifold& m) { return m.id() == manifold::ManifoldId::s3 ? 24 : 64; }

/// Half-bound margin, NaN when kappa/lambda leaves the valid radius range.
inline double safe_half_bound(const manifold::VolumeGeometry<double>& g, double lambda, double kappa) {
  try {
    return perturb::half_bound_certify(g, lambda, kappa).margin;
  } catch (const std::domain_error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

/// All per-eigenfunction quantities. gamma is centred at the located maximum
/// unless the config fixes a centre.
inline ExperimentRecord evaluate(const manifold::ModelManifold& m, const manifold::Eigenfunction& psi, const Config& c) {
  if (psi.is_constant()) throw std::invalid_argument("evaluate: constant eigenfunction has no normalization");
  ExperimentRecord r;
  r.manifold = m.name();
  r.family = psi.family();
  r.index = psi.index_label();
  if (const auto* z = std::get_if<manifold::Zonal>(&psi.spec())) {
    r.sort_key = {z->ell};
  } else if (const auto* f = std::get_if<manifold::Frequency>(&psi.spec())) {
    r.sort_key = {f->k[0], f->k[1]};
  }
  const int n = m.dimension();
  r.lambda = psi.lambda();
  r.kappa = c.kappa;
  r.p = c.p;
  r.l2_norm = manifold::l2_norm(m, psi);
  const auto mx = means::locate_max(m, psi, coarse_size(m));
  r.sup_norm = mx.value;
  r.plateau = mx.plateau;
  r.center = c.center ? m.normalize(*c.center) : mx.point;
  r.hormander_ratio = r.sup_norm * std::pow(r.lambda, -(n - 1) / 2.0) / r.l2_norm;

  r.radius = c.kappa / r.lambda;
  r.sphere_measure = m.geometry().h(r.radius);
  const int nodes = c.nodes > 0 ? c.nodes : means::default_nodes(m, r.lambda, r.radius);
  const auto q = manifold::geodesic_sphere(m, r.center, r.radius, nodes);
  double s2 = 0;
  double sp = 0;
  for (std::size_t i = 0; i < q.nodes.size(); ++i) {
    const double v = std::abs(psi(q.nodes[i]));
    s2 += q.weights[i] * v * v;
    sp += q.weights[i] * std::pow(v, c.p);
  }
  r.sphere_l2 = std::sqrt(s2);
  r.sphere_lp = std::pow(sp, 1 / c.p);
  r.restriction_ratio = r.sphere_lp * std::pow(r.lambda, -(n - 1) * (c.p - 2) / (2 * c.p)) / r.l2_norm;
  r.normalized_restriction_ratio = r.restriction_ratio / std::pow(r.sphere_measure, 1 / c.p);
  const double mean_sq = s2 / r.sphere_measure;
  r.equiv_ratio = 2 * mean_sq / (r.sup_norm * r.sup_norm);
  r.reconstructed_constant =
      std::sqrt(2 / r.sphere_measure) * r.sphere_l2 * std::pow(r.lambda, -(n - 1) / 2.0) / r.l2_norm;
  r.half_bound_margin = safe_half_bound(m.geometry(), r.lambda, c.kappa);
  r.sphere_half_bound_margin = safe_half_bound(m.geometry(), r.lambda, c.kappa * std::numbers::sqrt2);
  return r;
}

inline std::vector<ExperimentRecord> run_sweep(const Config& c, std::vector<std::string>* warnings = nullptr) {
  c.validate();
  const auto m = manifold::make_manifold(c.manifold);
  std::vector<ExperimentRecord> out;
  for (const auto& psi : sweep_family(m, c, warnings)) out.push_back(evaluate(m, psi, c));
  std::sort(out.begin(), out.end(), record_less);
  return out;
}

inline std::vector<ExperimentRecord> run_hormander(const Config& c, std::vector<std::string>* w = nullptr) {
  return run_sweep(c, w);
}
inline std::vector<ExperimentRecord> run_restriction(const Config& c, std::vector<std::string>* w = nullptr) {
  return run_sweep(c, w);
}
inline std::vector<ExperimentRecord> run_equivalence(const Config& c, std::vector<std::string>* w = nullptr) {
  return run_sweep(c, w);
}

// ---------------------------------------------------------------------------
// Output

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline constexpr const char* kCsvHeader =
    "manifold,family,index,lambda,kappa,p,hormander_ratio,restriction_ratio,equiv_ratio,half_bound_margin";

inline void write_csv(std::ostream& os, const std::vector<ExperimentRecord>& records) {
  os << kCsvHeader << '\n';
  for (const auto& r : records) {
    os << r.manifold << ',' << r.family << ',' << r.index << ',' << format_real(r.lambda) << ','
       << format_real(r.kappa) << ',' << format_real(r.p) << ',' << format_real(r.hormander_ratio) << ','
       << format_real(r.restriction_ratio) << ',' << format_real(r.equiv_ratio) << ','
       << format_real(r.half_bound_margin) << '\n';
  }
}

inline json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const ExperimentRecord& r) {
  return json{{"manifold", r.manifold},
              {"family", r.family},
              {"index", r.index},
              {"lambda", r.lambda},
              {"kappa", r.kappa},
              {"p", r.p},
              {"hormander_ratio", r.hormander_ratio},
              {"restriction_ratio", r.restriction_ratio},
              {"normalized_restriction_ratio", r.normalized_restriction_ratio},
              {"equiv_ratio", r.equiv_ratio},
              {"half_bound_margin", number_or_null(r.half_bound_margin)},
              {"sphere_half_bound_margin", number_or_null(r.sphere_half_bound_margin)},
              {"sup_norm", r.sup_norm},
              {"l2_norm", r.l2_norm},
              {"radius", r.radius},
              {"sphere_measure", r.sphere_measure},
              {"sphere_l2", r.sphere_l2},
              {"sphere_lp", r.sphere_lp},
              {"reconstructed_constant", r.reconstructed_constant},
              {"plateau", r.plateau},
              {"center", r.center.c}};
}

/// Running suprema of the ratios: the measured C(M, lambda).
inline json empirical_constants(const std::vector<ExperimentRecord>& records) {
  double h = 0, rr = 0, rc = 0;
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& r : records) {
    h = std::max(h, r.hormander_ratio);
    rr = std::max(rr, r.restriction_ratio);
    rc = std::max(rc, r.reconstructed_constant);
    emin = std::min(emin, r.equiv_ratio);
  }
  return json{{"hormander_max", h},
              {"restriction_max", rr},
              {"reconstructed_max", rc},
              {"equiv_min", number_or_null(emin)}};
}

struct Check {
  std::string name;
  bool pass = false;
  double margin = 0;  // signed room: >= 0 when passing
  double tolerance = 0;
  std::string detail;
};

inline json to_json(const Check& c) {
  return json{{"name", c.name},
              {"pass", c.pass},
              {"margin", number_or_null(c.margin)},
              {"tolerance", c.tolerance},
              {"detail", c.detail}};
}

struct Report {
  json config;
  std::vector<Check> checks;
  std::vector<ExperimentRecord> records;
  std::vector<std::string> warnings;
  json extra = json::object();

  bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  json to_json() const {
    json j;
    j["config"] = config;
    j["checks"] = json::array();
    for (const auto& c : checks) j["checks"].push_back(experiment::to_json(c));
    j["records"] = json::array();
    for (const auto& r : records) j["records"].push_back(experiment::to_json(r));
    j["warnings"] = warnings;
    j["all_pass"] = all_pass();
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
  }
};

/// Check passes when value <= limit (margin = limit - value).
inline Check upper_check(std::string name, double value, double limit, std::string detail = {}) {
  Check c{std::move(name), value <= limit, limit - value, limit, std::move(detail)};
  if (std::isnan(value)) c.pass = false;
  return c;
}
/// Check passes when value >= limit (margin = value - limit).
inline Check lower_check(std::string name, double value, double limit, double tolerance, std::string detail = {}) {
  Check c{std::move(name), value >= limit - tolerance, value - limit, tolerance, std::move(detail)};
  if (std::isnan(value)) c.pass = false;
  return c;
}

// ---------------------------------------------------------------------------
// Suite

struct SuiteConfig {
  double kappa = 1.0;
  double p = 4.0;  // exponent of the L^p restriction sweep
  int order = 3;
  int nodes = 0;
  int s2_lmax = 200;
  int s3_lmax = 40;
  int t2_kmax = 25;
  int epd_grid = 400;

  json to_json() const {
    return json{{"kappa", kappa},     {"p", p},           {"order", order},       {"nodes", nodes},
                {"s2_lmax", s2_lmax}, {"s3_lmax", s3_lmax}, {"t2_kmax", t2_kmax}, {"epd_grid", epd_grid}};
  }
};

struct SuiteResult {
  Report report;
  std::vector<std::pair<std::string, std::vector<ExperimentRecord>>> tables;  // file stem, records
};

namespace detail {

inline double j0(double x) { return specialfun::bessel_j(specialfun::BesselOrder::from_twice(0), x); }

// Mean profile of psi^2 on (0, r_max] as an OdeSolution: u(0) from
// extrapolation, u' by 4th-order differences using the evenness of the profile.
inline odecmp::OdeSolution<double> profile_as_solution(const means::MeanProfile& prof) {
  const std::size_t N = prof.values.size();
  const double h = prof.step();
  odecmp::OdeSolution<double> s;
  s.grid.push_back(0);
  s.u.push_back(prof.origin_value());
  for (std::size_t i = 0; i < N; ++i) {
    s.grid.push_back(prof.radii[i]);
    s.u.push_back(prof.values[i]);
  }
  const std::size_t M = s.u.size();
  auto at = [&](long i) { return s.u[static_cast<std::size_t>(std::abs(i))]; };
  s.du.assign(M, 0.0);
  for (std::size_t i = 1; i < M; ++i) {
    const long k = static_cast<long>(i);
    if (i + 2 < M) {
      s.du[i] = (-at(k + 2) + 8 * at(k + 1) - 8 * at(k - 1) + at(k - 2)) / (12 * h);
    } else {
      s.du[i] = (25 * at(k) - 48 * at(k - 1) + 36 * at(k - 2) - 16 * at(k - 3) + 3 * at(k - 4)) / (12 * h);
    }
  }
  return s;
}

struct ComparisonOutcome {
  double worst_margin = std::numeric_limits<double>::infinity();  // min (I - J) / I(0)
  double worst_epd = std::numeric_limits<double>::infinity();     // min S / (lambda^2 I(0))
  bool all_pass = true;
  std::string failures;
};

// Square-mode EPD inequality and I >= J on (0, kappa/lambda) for one eigenfunction.
inline void compare_one(const manifold::ModelManifold& m, const manifold::Eigenfunction& psi, double kappa, int grid,
                        int nodes, ComparisonOutcome& acc) {
  const auto mx = means::locate_max(m, psi, coarse_size(m));
  const double lambda = psi.lambda();
  const double r_max = kappa / lambda;
  const int nn = nodes > 0 ? nodes : means::default_nodes(m, lambda, r_max);
  const auto prof = means::mean_profile(m, psi, mx.point, 2.0, r_max, grid, nn);
  const double i0 = prof.origin_value();
  const auto S = means::epd_residual(prof, m.geometry(), lambda, means::EpdMode::square);
  acc.worst_epd = std::min(acc.worst_epd, S.min() / (lambda * lambda * i0));

  const auto I = profile_as_solution(prof);
  const auto& geo = m.geometry();
  odecmp::SingularIvp<double> ivp;
  ivp.pole = m.dimension() - 1;
  ivp.g_regular = [geo](double r) { return geo.c(r); };
  const auto ct = geo.correction_taylor(3);
  ivp.g_taylor.assign(ct.begin(), ct.end());
  ivp.h = [lambda](double) { return 2 * lambda * lambda; };
  ivp.h_taylor = {2 * lambda * lambda, 0, 0};
  ivp.f_taylor = {0, 0, 0};
  ivp.u0 = i0;
  const auto J = odecmp::solve_ivp(ivp, prof.step(), r_max);

  odecmp::ComparisonProblem<double> L;
  L.g = [geo](double r) { return geo.g(r); };
  L.h = [lambda](double) { return 2 * lambda * lambda; };
  L.hypothesis_tol = 1e-6 * lambda * lambda * i0;
  L.conclusion_tol = 1e-6;
  L.matched_data = true;
  const auto cert = odecmp::comparison_certificate(I, J, L);
  // The profile and the J solve start from the same I(0); u'(0) = 0 for both.
  acc.worst_margin = std::min(acc.worst_margin, cert.min_margin / i0);
  if (cert.outcome != odecmp::Outcome::pass) {
    acc.all_pass = false;
    if (acc.failures.size() < 400) {
      acc.failures += m.name() + ":" + psi.index_label() + " " + odecmp::to_string(cert.outcome) + " " + cert.diagnostic + "; ";
    }
  }
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace detail

/// Runs every verification check and the standard sweeps. Individual check
/// failures are recorded, never thrown.
inline SuiteResult run_suite(const SuiteConfig& sc) {
  using clock = std::chrono::steady_clock;
  const auto t_start = clock::now();
  SuiteResult out;
  Report& rep = out.report;
  rep.config = sc.to_json();
  auto guarded = [&](const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      rep.checks.push_back(Check{name, false, std::numeric_limits<double>::quiet_NaN(), 0, std::string("error: ") + e.what()});
    }
  };
  const auto J0 = specialfun::BesselOrder::from_twice(0);
  const auto s2 = manifold::make_manifold(manifold::ManifoldId::s2);
  const auto s3 = manifold::make_manifold(manifold::ManifoldId::s3);
  const auto t2 = manifold::make_manifold(manifold::ManifoldId::t2);
  const auto e2 = manifold::make_manifold(manifold::ManifoldId::e2);

  // Special functions.
  guarded("specialfun_j0_series", [&] {
    double oracle = 0, term = 1;
    for (int m = 0; m < 30; ++m) {
      if (m > 0) term *= -0.25 / (double(m) * m);
      oracle += term;
    }
    rep.checks.push_back(upper_check("specialfun_j0_series", std::abs(specialfun::bessel_j(J0, 1.0) - oracle), 1e-12));
  });
  guarded("specialfun_wronskian", [&] {
    const specialfun::FundamentalPair<double> pair(2);
    double worst = 0;
    for (int i = 0; i <= 200; ++i) {
      const double x = 0.01 * std::pow(1000.0, i / 200.0);
      worst = std::max(worst, std::abs(x * pair.wronskian(x) - 2 / std::numbers::pi));
    }
    rep.checks.push_back(upper_check("specialfun_wronskian", worst, 1e-8, "max |x W(J0,Y0) - 2/pi| on [0.01,10]"));
  });
  guarded("specialfun_half_integer", [&] {
    double worst = 0;
    for (int i = 0; i <= 200; ++i) {
      const double x = 0.1 + 9.9 * i / 200.0;
      const double a = std::sqrt(2 / (std::numbers::pi * x));
      worst = std::max(worst, std::abs(specialfun::bessel_j(specialfun::BesselOrder::from_twice(1), x) - a * std::sin(x)) / a);
      worst = std::max(worst, std::abs(specialfun::bessel_j(specialfun::BesselOrder::from_twice(3), x) -
                                       a * (std::sin(x) / x - std::cos(x))) / a);
    }
    rep.checks.push_back(upper_check("specialfun_half_integer", worst, 1e-12, "series vs closed form on [0.1,10]"));
  });

  // Flat mean-value property.
  guarded("flat_mean_value", [&] {
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> comp(-8, 8);
    std::uniform_real_distribution<double> radius(0.05, 0.4);
    double worst = 0;
    for (int trial = 0; trial < 10;) {
      const std::array<int, 2> k{comp(rng), comp(rng)};
      const double norm = std::hypot(k[0], k[1]);
      if (norm == 0 || norm > 12) continue;
      ++trial;
      const auto psi = manifold::eigenfunction(t2, manifold::Frequency{k, 0.0});
      const auto x0 = t2.random_point(rng);
      const double r = radius(rng);
      worst = std::max(worst, std::abs(means::spherical_mean(t2, psi, x0, r, 512) - psi(x0) * detail::j0(norm * r)));
    }
    rep.checks.push_back(upper_check("flat_mean_value", worst, 1e-8, "10 random (k, x0), |k| <= 12, r <= 0.4, m = 512"));
  });

  // EPD equality: second-order decay of the residual.
  guarded("epd_equality_order", [&] {
    auto order_for = [](const manifold::ModelManifold& m, const manifold::Eigenfunction& psi, const manifold::Point& x,
                        double r_max) {
      std::vector<double> res;
      for (int N : {50, 100, 200}) {
        const auto prof = means::mean_profile(m, psi, x, 1.0, r_max, N, 256);
        res.push_back(means::epd_residual(prof, m.geometry(), psi.lambda(), means::EpdMode::eigen).max_abs());
      }
      return std::min(std::log2(res[0] / res[1]), std::log2(res[1] / res[2]));
    };
    const double o_t2 = order_for(t2, manifold::eigenfunction(t2, manifold::Frequency{{3, 4}, 0.3}),
                                  manifold::flat_point(1.0, 2.0), 0.2);
    const double o_s2 = order_for(s2, manifold::eigenfunction(s2, manifold::Zonal{20, std::nullopt}),
                                  manifold::s2_point(0.3, 0.2), 0.05);
    rep.checks.push_back(lower_check("epd_equality_order", std::min(o_t2, o_s2), 1.8, 0,
                                     "observed orders t2 " + format_real(o_t2) + ", s2 " + format_real(o_s2)));
  });

  // EPD inequality and comparison, on s2 zonal 10..100 and t2 |k| in 5..25.
  guarded("epd_inequality", [&] {
    detail::ComparisonOutcome acc;
    Config c;
    c.lmin = 10;
    c.lmax = std::min(100, sc.s2_lmax);
    for (const auto& psi : sweep_family(s2, c)) detail::compare_one(s2, psi, sc.kappa, sc.epd_grid, sc.nodes, acc);
    Config ct;
    ct.manifold = "t2";
    ct.family = "freq";
    ct.lmin = 5;
    ct.lmax = std::min(25, sc.t2_kmax);
    for (const auto& psi : sweep_family(t2, ct)) detail::compare_one(t2, psi, sc.kappa, sc.epd_grid, sc.nodes, acc);
    rep.checks.push_back(lower_check("epd_inequality", acc.worst_epd, 0, 1e-6,
                                     "min (I'' + g I' + 2 lambda^2 I) / (lambda^2 I(0))"));
    Check cmp = lower_check("comparison_end_to_end", acc.worst_margin, 0, 1e-6, "min (I - J) / I(0) on (0, kappa/lambda)");
    if (!acc.all_pass) {
      cmp.pass = false;
      cmp.detail += "; " + acc.failures;
    }
    rep.checks.push_back(cmp);
  });

  guarded("comparison_nonvacuous", [&] {
    // Push the s2 l = 20 profile below J mid-interval: the certificate must not pass.
    const auto psi = manifold::eigenfunction(s2, manifold::Zonal{20, std::nullopt});
    const double lambda = psi.lambda();
    const double r_max = 1.0 / lambda;
    const auto prof = means::mean_profile(s2, psi, s2.north_pole(), 2.0, r_max, 400, 256);
    auto I = detail::profile_as_solution(prof);
    const auto& geo = s2.geometry();
    odecmp::SingularIvp<double> ivp;
    ivp.pole = 1;
    ivp.g_regular = [geo](double r) { return geo.c(r); };
    ivp.h = [lambda](double) { return 2 * lambda * lambda; };
    ivp.u0 = I.u[0];
    const auto J = odecmp::solve_ivp(ivp, prof.step(), r_max);
    for (std::size_t i = 0; i < I.u.size(); ++i) {
      const double s = std::sin(std::numbers::pi * I.grid[i] / r_max);
      I.u[i] -= 0.05 * I.u[0] * s * s;
    }
    odecmp::ComparisonProblem<double> L;
    L.g = [geo](double r) { return geo.g(r); };
    L.h = [lambda](double) { return 2 * lambda * lambda; };
    L.assume_hypotheses = true;
    const auto cert = odecmp::comparison_certificate(I, J, L);
    Check c{"comparison_nonvacuous", cert.outcome == odecmp::Outcome::fail && cert.min_margin < 0, -cert.min_margin, 0,
            "fabricated violation outcome " + std::string(odecmp::to_string(cert.outcome))};
    rep.checks.push_back(c);
  });

  // kappa scan and half bound.
  guarded("kappa_scan", [&] {
    const auto k2 = perturb::kappa_scan(2, 0.75);
    const auto k3 = perturb::kappa_scan(3, 0.75);
    const double resid = std::abs(specialfun::v0_profile(2, k2.kappa_star) - 0.75);
    const bool ok = k2.kappa_star >= 1.00 && k2.kappa_star <= 1.06 && k3.kappa_star >= 1.24 && k3.kappa_star <= 1.30 &&
                    resid <= 1e-10;
    const double margin = std::min({k2.kappa_star - 1.00, 1.06 - k2.kappa_star, k3.kappa_star - 1.24, 1.30 - k3.kappa_star});
    rep.checks.push_back(Check{"kappa_scan", ok, margin, 1e-10,
                               "kappa*(2) = " + format_real(k2.kappa_star) + ", kappa*(3) = " + format_real(k3.kappa_star)});
    rep.extra["kappa_star"] = json{{"2", k2.kappa_star}, {"3", k3.kappa_star}};
  });
  guarded("half_bound", [&] {
    double worst_rescaled = std::numeric_limits<double>::infinity();
    double worst_sphere = std::numeric_limits<double>::infinity();
    json margins = json::array();
    for (const auto* m : {&t2, &s2, &s3}) {
      for (double lambda : {10.0, 25.0, 50.0, 100.0, 200.0}) {
        const double a = perturb::half_bound_certify(m->geometry(), lambda, sc.kappa).margin;
        const double b = perturb::half_bound_certify(m->geometry(), lambda, sc.kappa * std::numbers::sqrt2).margin;
        worst_rescaled = std::min(worst_rescaled, a);
        worst_sphere = std::min(worst_sphere, b);
        margins.push_back(json{{"manifold", m->name()}, {"lambda", lambda}, {"rho_margin", a}, {"sphere_margin", b}});
      }
    }
    rep.extra["half_bound"] = margins;
    rep.checks.push_back(lower_check("half_bound_rescaled", worst_rescaled, 0, 0,
                                     "min J - J(0)/2 for rho in (0, kappa), lambda in {10..200}, t2/s2/s3"));
    rep.checks.push_back(lower_check("half_bound_sphere", worst_sphere, 0, 0,
                                     "min J - J(0)/2 for r in (0, kappa/lambda), lambda in {10..200}, t2/s2/s3"));
    const double flat = perturb::half_bound_certify(t2.geometry(), 50.0, sc.kappa).margin;
    rep.checks.push_back(upper_check("half_bound_flat_value", std::abs(flat - (detail::j0(sc.kappa) - 0.5)), 1e-8,
                                     "flat margin " + format_real(flat) + " vs J0(kappa) - 1/2"));
  });

  // Perturbation series in quad precision.
  guarded("perturbation_series", [&] {
    using perturb::Quad;
    const auto geo = manifold::volume_geometry<Quad>(manifold::ManifoldId::s2);
    std::vector<double> eps, err;
    double residual = 0, ratio = 0, drop50 = 0;
    json rows = json::array();
    for (double lambda : {25.0, 50.0, 100.0, 200.0}) {
      const auto prob = perturb::rescale<Quad>(geo, Quad(lambda));
      const auto series = perturb::compute_vn(prob, sc.order);
      const auto e = perturb::assemble_and_validate(series, prob);
      eps.push_back(e.epsilon);
      err.push_back(e.errors.back());
      for (double r : series.ivp_residual) residual = std::max(residual, r);
      for (int j = 0; j < sc.order; ++j) ratio = std::max(ratio, series.norm_ratio(j));
      if (lambda == 50.0 && sc.order >= 1) drop50 = e.errors[0] / e.errors[1];
      rows.push_back(json{{"lambda", lambda}, {"epsilon", e.epsilon}, {"errors", e.errors}, {"sup", series.sup},
                          {"dsup", series.dsup}, {"ivp_residual", series.ivp_residual},
                          {"solver_discrepancy", series.solver_discrepancy}});
    }
    const double slope = perturb::fit_slope(eps, err);
    rep.extra["series"] = json{{"rows", rows}, {"slope", slope}};
    rep.checks.push_back(lower_check("series_slope", slope, sc.order + 0.5, 0, "fitted log-error slope vs log eps, s2"));
    rep.checks.push_back(upper_check("series_ivp_residual", residual, 1e-6));
    rep.checks.push_back(upper_check("series_norm_ratio", ratio, 5.0, "max ||v_{n+1}|| / ||v_n|| over the sweep"));
    if (sc.order >= 1) rep.checks.push_back(lower_check("series_first_order_gain", drop50, 10, 0, "error(N=0)/error(N=1) at lambda = 50"));
  });

  // Sweeps with records.
  std::vector<ExperimentRecord> s2_records, s2_p_records, t2_records, s3_records;
  guarded("sweeps", [&] {
    Config c;
    c.lmin = 1;
    c.lmax = sc.s2_lmax;
    c.kappa = sc.kappa;
    c.nodes = sc.nodes;
    s2_records = run_sweep(c, &rep.warnings);
    Config cp = c;
    cp.p = sc.p;
    s2_p_records = run_sweep(cp, &rep.warnings);
    Config ct = c;
    ct.manifold = "t2";
    ct.family = "freq";
    ct.lmax = sc.t2_kmax;
    t2_records = run_sweep(ct, &rep.warnings);
    Config c3 = c;
    c3.manifold = "s3";
    c3.lmax = sc.s3_lmax;
    s3_records = run_sweep(c3, &rep.warnings);
  });
  out.tables = {{"s2_zonal", s2_records},
                {"s2_zonal_p" + format_real(sc.p), s2_p_records},
                {"s3_zonal", s3_records},
                {"t2_freq", t2_records}};

  guarded("hormander_saturation", [&] {
    const auto it = std::find_if(s2_records.begin(), s2_records.end(), [](const auto& r) { return r.index == "200"; });
    if (it == s2_records.end()) throw std::runtime_error("s2 sweep does not reach l = 200");
    const double target = 1 / std::sqrt(2 * std::numbers::pi);
    rep.checks.push_back(upper_check("hormander_saturation", std::abs(it->hormander_ratio / target - 1), 0.02,
                                     "s2 zonal l = 200 ratio " + format_real(it->hormander_ratio)));
    double worst = 0;
    for (int l : {3, 50, 200}) {
      const auto psi = manifold::eigenfunction(s2, manifold::Zonal{l, std::nullopt});
      const double q = manifold::l2_norm(s2, psi, l + 40);
      worst = std::max(worst, std::abs(q - manifold::l2_norm(s2, psi)) / manifold::l2_norm(s2, psi));
    }
    rep.checks.push_back(upper_check("l2_quadrature_vs_closed_form", worst, 1e-8));
  });

  guarded("restriction_boundedness", [&] {
    std::vector<double> r2, rp;
    for (const auto& r : s2_records) r2.push_back(r.restriction_ratio);
    for (const auto& r : s2_p_records) rp.push_back(r.restriction_ratio);
    const double q2 = *std::max_element(r2.begin(), r2.end()) / detail::median(r2);
    const double qp = *std::max_element(rp.begin(), rp.end()) / detail::median(rp);
    rep.checks.push_back(upper_check("restriction_boundedness_p2", q2, 2.0, "max/median of s2 zonal ratios, p = 2"));
    Check cp = upper_check("restriction_boundedness_p", qp, 2.0, "max/median of s2 zonal ratios, p = " + format_real(sc.p));
    rep.checks.push_back(cp);
  });

  guarded("equivalence", [&] {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto* recs : {&s2_records, &s2_p_records, &t2_records, &s3_records}) {
      for (const auto& r : *recs) worst = std::min(worst, r.equiv_ratio);
    }
    rep.checks.push_back(lower_check("equivalence_inequality", worst, 1.0, 1e-6, "min 2 I(x, kappa/lambda) / ||psi||^2"));
    // Flat oracles: t2 single frequency and the e2 radial family.
    const auto psi = manifold::eigenfunction(t2, manifold::Frequency{{20, 0}, 0.0});
    Config c;
    c.manifold = "t2";
    c.family = "freq";
    c.kappa = sc.kappa;
    const auto rec = evaluate(t2, psi, c);
    rep.checks.push_back(upper_check("equivalence_t2_value", std::abs(rec.equiv_ratio - (1 + detail::j0(2 * sc.kappa))), 1e-8,
                                     "t2 |k| = 20: " + format_real(rec.equiv_ratio) + " vs 1 + J0(2 kappa)"));
    const double lambda = 20;
    const auto radial = manifold::eigenfunction(e2, manifold::Radial{lambda, manifold::flat_point(0, 0)});
    const double mean_sq = means::spherical_mean(
        e2, [&](const manifold::Point& x) { return radial(x) * radial(x); }, manifold::flat_point(0, 0), sc.kappa / lambda, 256);
    const double ratio = 2 * mean_sq / (radial(manifold::flat_point(0, 0)) * radial(manifold::flat_point(0, 0)));
    const double target = 2 * detail::j0(sc.kappa) * detail::j0(sc.kappa);
    rep.checks.push_back(upper_check("equivalence_flat_radial_value", std::abs(ratio - target), 1e-8,
                                     "e2 J0(lambda r): " + format_real(ratio) + " vs 2 J0(kappa)^2"));
  });

  for (const auto* recs : {&s2_records, &s2_p_records, &t2_records, &s3_records}) {
    rep.records.insert(rep.records.end(), recs->begin(), recs->end());
  }
  std::stable_sort(rep.records.begin(), rep.records.end(), record_less);
  json constants = json::object();
  for (const auto& [stem, recs] : out.tables) constants[stem] = empirical_constants(recs);
  rep.extra["constants"] = constants;

  const double seconds = std::chrono::duration<double>(clock::now() - t_start).count();
  rep.checks.push_back(upper_check("suite_runtime", seconds, 300.0, "seconds"));
  rep.extra["runtime_seconds"] = seconds;
  return out;
}

/// Writes report.json and one CSV per sweep into dir.
inline void write_suite(const SuiteResult& s, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [stem, recs] : s.tables) {
    std::ofstream f(dir / (stem + ".csv"), std::ios::binary);
    write_csv(f, recs);
  }
  std::ofstream f(dir / "report.json", std::ios::binary);
  f << s.report.to_json().dump(2) << '\n';
}

}  // namespace eigmeans::experiment
