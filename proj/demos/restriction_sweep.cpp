// Restriction ratios of s2 zonal harmonics on circles of radius kappa/lambda
// around their maximum, for a few exponents p. Prints a plot-ready table.

#include <cstdio>
#include <cstdlib>

#include "eigmeans/experiment.hpp"

int main(int argc, char** argv) {
  namespace ex = eigmeans::experiment;
  const int lmax = argc > 1 ? std::atoi(argv[1]) : 100;
  const double kappa = argc > 2 ? std::atof(argv[2]) : 1.0;

  std::printf("%6s %12s %14s %14s %14s %12s\n", "l", "lambda", "ratio_p2", "ratio_p4", "ratio_p6", "equiv");
  std::vector<std::vector<ex::ExperimentRecord>> runs;
  for (double p : {2.0, 4.0, 6.0}) {
    ex::Config c;
    c.lmin = 5;
    c.lmax = lmax;
    c.kappa = kappa;
    c.p = p;
    runs.push_back(ex::run_sweep(c));
  }
  for (std::size_t i = 0; i < runs[0].size(); i += 5) {
    const auto& r = runs[0][i];
    std::printf("%6s %12.6f %14.8f %14.8f %14.8f %12.8f\n", r.index.c_str(), r.lambda, r.restriction_ratio,
                runs[1][i].restriction_ratio, runs[2][i].restriction_ratio, r.equiv_ratio);
  }
  return 0;
}
