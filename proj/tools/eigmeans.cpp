// Command-line driver for the eigenfunction experiments.
//
//   eigmeans hormander --manifold s2 --lmin 1 --lmax 200
//   eigmeans restrict  --manifold t2 --family freq --kmax 25 --kappa 1 --p 4
//   eigmeans equiv     --manifold s3 --lmax 40 --format json
//   eigmeans kappa     --manifold s2
//   eigmeans series    --manifold s2 --order 3
//   eigmeans suite     --out results/
//
// Exit status: 0 all checks pass, 1 a check failed, 2 configuration error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "eigmeans/eigmeans.hpp"

namespace {

using eigmeans::experiment::Check;
using eigmeans::experiment::Config;
using eigmeans::experiment::ConfigError;
using eigmeans::experiment::format_real;
using eigmeans::experiment::json;
using eigmeans::experiment::Report;

struct Options {
  std::string manifold = "s2";
  std::string family;
  int lmin = 1;
  int lmax = -1;
  int kmax = -1;
  double kappa = 1.0;
  double p = 2.0;
  int order = 3;
  int nodes = 0;
  std::string out;
  std::string format = "csv";
  std::string center;
  double threshold = 0.75;
  std::string precision = "quad";
  std::vector<double> lambdas{25, 50, 100, 200};
};

Config make_config(const Options& o) {
  Config c;
  c.manifold = o.manifold;
  const auto id = eigmeans::manifold::parse_manifold(o.manifold);
  const bool torus = id == eigmeans::manifold::ManifoldId::t2;
  c.family = o.family.empty() ? (torus ? "freq" : "zonal") : o.family;
  c.lmin = o.lmin;
  if (torus) {
    c.lmax = o.kmax >= 0 ? o.kmax : (o.lmax >= 0 ? o.lmax : 25);
  } else {
    if (o.kmax >= 0) throw ConfigError("--kmax applies to t2 only");
    c.lmax = o.lmax >= 0 ? o.lmax : (id == eigmeans::manifold::ManifoldId::s3 ? 40 : 200);
  }
  c.kappa = o.kappa;
  c.p = o.p;
  c.order = o.order;
  c.nodes = o.nodes;
  if (!o.center.empty()) {
    eigmeans::manifold::Point pt;
    std::stringstream ss(o.center);
    std::string item;
    int i = 0;
    while (std::getline(ss, item, ',')) {
      if (i >= 4) throw ConfigError("--center takes at most 4 coordinates");
      pt.c[i++] = std::stod(item);
    }
    c.center = pt;
  }
  c.validate();
  return c;
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + o.out);
  f << text;
}

int finish(const Options& o, Report& rep, const std::function<void(std::ostream&)>& csv) {
  for (const auto& w : rep.warnings) std::cerr << "warning: " << w << '\n';
  std::ostringstream os;
  if (o.format == "json") {
    os << rep.to_json().dump(2) << '\n';
  } else {
    csv(os);
  }
  emit(o, os.str());
  for (const auto& c : rep.checks) {
    if (!c.pass) std::cerr << "check failed: " << c.name << " (margin " << format_real(c.margin) << ") " << c.detail << '\n';
  }
  return rep.all_pass() ? 0 : 1;
}

int run_records(const Options& o, const std::string& mode) {
  const Config c = make_config(o);
  Report rep;
  rep.config = c.to_json();
  rep.config["command"] = mode;
  rep.records = eigmeans::experiment::run_sweep(c, &rep.warnings);
  const auto& recs = rep.records;
  const bool finite = std::all_of(recs.begin(), recs.end(), [](const auto& r) {
    return std::isfinite(r.hormander_ratio) && r.hormander_ratio > 0 && std::isfinite(r.restriction_ratio) &&
           r.restriction_ratio > 0 && std::isfinite(r.equiv_ratio);
  });
  rep.checks.push_back(Check{"ratios_finite", finite, finite ? 0.0 : -1.0, 0, "all ratios positive and finite"});
  if (mode != "hormander") {
    const int n = eigmeans::manifold::make_manifold(c.manifold).dimension();
    const double kstar = eigmeans::perturb::kappa_scan(n, 0.75).kappa_star;
    rep.checks.push_back(eigmeans::experiment::upper_check("kappa_within_kappa_star", c.kappa, kstar,
                                                           "kappa*(" + std::to_string(n) + ") = " + format_real(kstar)));
  }
  if (mode == "equiv") {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : recs) worst = std::min(worst, r.equiv_ratio);
    if (!recs.empty()) {
      rep.checks.push_back(eigmeans::experiment::lower_check("equivalence_inequality", worst, 1.0, 1e-6,
                                                             "min 2 I(x, kappa/lambda) / ||psi||^2"));
    }
  }
  rep.extra["constants"] = eigmeans::experiment::empirical_constants(recs);
  return finish(o, rep, [&](std::ostream& os) { eigmeans::experiment::write_csv(os, recs); });
}

int run_kappa(const Options& o) {
  const int n = eigmeans::manifold::make_manifold(o.manifold).dimension();
  if (!(o.threshold > 0)) throw ConfigError("--threshold must be positive");
  const auto k = eigmeans::perturb::kappa_scan(n, o.threshold);
  Report rep;
  rep.config = json{{"command", "kappa"}, {"manifold", o.manifold}, {"threshold", o.threshold}};
  const double resid = k.flagged ? 0.0 : std::abs(eigmeans::specialfun::v0_profile(n, k.kappa_star) - o.threshold);
  rep.checks.push_back(eigmeans::experiment::upper_check("kappa_residual", resid, 1e-10, "|v0(kappa*) - threshold|"));
  rep.extra["kappa"] = json{{"n", n}, {"threshold", o.threshold}, {"kappa_star", k.kappa_star}, {"flagged", k.flagged}};
  return finish(o, rep, [&](std::ostream& os) {
    os << "n,threshold,kappa_star,flagged\n"
       << n << ',' << format_real(o.threshold) << ',' << format_real(k.kappa_star) << ',' << (k.flagged ? 1 : 0) << '\n';
  });
}

template <class Real>
int run_series_in(const Options& o) {
  using namespace eigmeans;
  const auto id = manifold::parse_manifold(o.manifold);
  if (id == manifold::ManifoldId::e2) throw ConfigError("series needs t2, s2 or s3");
  if (o.order < 0 || o.order > 12) throw ConfigError("order must be in 0..12");
  if (o.lambdas.size() < 2) throw ConfigError("--lambdas needs at least two values");
  const auto geo = manifold::volume_geometry<Real>(id);
  Report rep;
  rep.config = json{{"command", "series"}, {"manifold", o.manifold}, {"order", o.order}, {"precision", o.precision},
                    {"lambdas", o.lambdas}};
  std::vector<double> eps, err;
  double residual = 0, ratio = 0, dratio = 0;
  json rows = json::array();
  std::ostringstream csv;
  csv << "lambda,epsilon,order,sup_norm,sup_derivative,norm_ratio,ivp_residual,partial_sum_error\n";
  for (double lambda : o.lambdas) {
    const auto prob = perturb::rescale<Real>(geo, Real(lambda));
    const auto s = perturb::compute_vn(prob, o.order);
    const auto e = perturb::assemble_and_validate(s, prob);
    eps.push_back(e.epsilon);
    err.push_back(e.errors.back());
    for (int j = 0; j <= o.order; ++j) {
      residual = std::max(residual, s.ivp_residual[j]);
      const double nr = j < o.order ? s.norm_ratio(j) : 0.0;
      if (j < o.order) {
        ratio = std::max(ratio, nr);
        dratio = std::max(dratio, s.derivative_ratio(j));
      }
      csv << format_real(lambda) << ',' << format_real(e.epsilon) << ',' << j << ',' << format_real(s.sup[j]) << ','
          << format_real(s.dsup[j]) << ',' << format_real(nr) << ',' << format_real(s.ivp_residual[j]) << ','
          << format_real(e.errors[j]) << '\n';
    }
    rows.push_back(json{{"lambda", lambda}, {"epsilon", e.epsilon}, {"k_sup", prob.k_sup}, {"errors", e.errors},
                        {"sup", s.sup}, {"dsup", s.dsup}, {"ivp_residual", s.ivp_residual},
                        {"solver_discrepancy", s.solver_discrepancy}, {"by_parts_discrepancy", s.by_parts_discrepancy}});
  }
  const bool flat = id == manifold::ManifoldId::t2;
  if (flat) {
    rep.checks.push_back(experiment::upper_check("flat_series_exact", *std::max_element(err.begin(), err.end()), 1e-10));
  } else {
    const double slope = perturb::fit_slope(eps, err);
    rep.extra["slope"] = slope;
    rep.checks.push_back(experiment::lower_check("series_slope", slope, o.order + 0.5, 0));
  }
  rep.checks.push_back(experiment::upper_check("series_ivp_residual", residual, 1e-6));
  rep.checks.push_back(experiment::upper_check("series_norm_ratio", ratio, 5.0));
  rep.extra["max_derivative_ratio"] = dratio;
  rep.extra["rows"] = rows;
  return finish(o, rep, [&](std::ostream& os) { os << csv.str(); });
}

int run_series(const Options& o) {
  if (o.precision == "quad") return run_series_in<eigmeans::perturb::Quad>(o);
  if (o.precision == "double") return run_series_in<double>(o);
  throw ConfigError("--precision must be quad or double");
}

int run_suite(const Options& o) {
  eigmeans::experiment::SuiteConfig sc;
  sc.kappa = o.kappa;
  if (!(o.kappa > 0)) throw ConfigError("kappa must be positive");
  if (o.p != 2.0) sc.p = o.p;
  if (!(sc.p >= 2)) throw ConfigError("p must be >= 2");
  sc.order = o.order;
  if (o.order < 1 || o.order > 12) throw ConfigError("suite order must be in 1..12");
  sc.nodes = o.nodes;
  if (o.lmax >= 0) sc.s2_lmax = o.lmax;
  if (o.kmax >= 0) sc.t2_kmax = o.kmax;
  const auto result = eigmeans::experiment::run_suite(sc);
  for (const auto& w : result.report.warnings) std::cerr << "warning: " << w << '\n';
  if (!o.out.empty()) {
    eigmeans::experiment::write_suite(result, o.out);
  } else {
    std::cout << result.report.to_json().dump(2) << '\n';
  }
  for (const auto& c : result.report.checks) {
    std::cerr << (c.pass ? "PASS " : "FAIL ") << c.name << "  margin=" << format_real(c.margin) << '\n';
  }
  return result.report.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spherical-mean and restriction experiments for Laplace eigenfunctions on model manifolds"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub, bool sweep) {
    sub->add_option("--manifold", o.manifold, "t2, s2 or s3")->check(CLI::IsMember({"t2", "s2", "s3"}));
    sub->add_option("--out", o.out, "output file (directory for suite)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--kappa", o.kappa, "sphere radius factor kappa (radius kappa/lambda)");
    sub->add_option("--p", o.p, "restriction exponent p >= 2");
    sub->add_option("--order", o.order, "perturbation order N");
    sub->add_option("--nodes", o.nodes, "sphere quadrature nodes (0 = automatic)");
    sub->add_option("--lmin", o.lmin, "smallest zonal degree, or smallest |k| on t2");
    sub->add_option("--lmax", o.lmax, "largest zonal degree");
    sub->add_option("--kmax", o.kmax, "largest |k| on t2");
    if (sweep) {
      sub->add_option("--family", o.family, "zonal (s2, s3) or freq (t2)")->check(CLI::IsMember({"zonal", "freq"}));
      sub->add_option("--center", o.center, "fixed sphere centre as ambient coordinates x,y[,z[,w]]");
    }
  };
  auto* hormander = app.add_subcommand("hormander", "sup-norm ratios ||psi||_inf lambda^(-(n-1)/2) / ||psi||_2");
  auto* restrict_ = app.add_subcommand("restrict", "L^p norms on geodesic spheres of radius kappa/lambda");
  auto* equiv = app.add_subcommand("equiv", "mean-value inequality 2 I(x, kappa/lambda) >= ||psi||_inf^2");
  auto* kappa = app.add_subcommand("kappa", "largest kappa with v0 >= threshold on (0, kappa)");
  auto* series = app.add_subcommand("series", "perturbation series v_n and its convergence in eps");
  auto* suite = app.add_subcommand("suite", "run every verification check");
  for (auto* s : {hormander, restrict_, equiv}) common(s, true);
  for (auto* s : {kappa, series, suite}) common(s, false);
  kappa->add_option("--threshold", o.threshold, "lower bound for v0");
  series->add_option("--precision", o.precision, "quad or double")->check(CLI::IsMember({"quad", "double"}));
  series->add_option("--lambdas", o.lambdas, "lambda sweep");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*hormander) return run_records(o, "hormander");
    if (*restrict_) return run_records(o, "restrict");
    if (*equiv) return run_records(o, "equiv");
    if (*kappa) return run_kappa(o);
    if (*series) return run_series(o);
    if (*suite) return run_suite(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
