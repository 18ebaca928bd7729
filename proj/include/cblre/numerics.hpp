#pragma once

#include <functional>
#include <vector>

namespace cblre {

// Adaptive Simpson quadrature to absolute tolerance.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double abs_tol, int max_depth = 48);

// Brent root finding on a bracketing interval [lo, hi] with f(lo)*f(hi) <= 0.
double brent_root(const std::function<double(double)>& f, double lo, double hi,
                  double x_tol = 1e-14, int max_iter = 200);

double normal_cdf(double x);

// Two-sided Kolmogorov-Smirnov statistic of samples against a cdf.
// Sorts a copy of the samples.
double ks_statistic(std::vector<double> samples,
                    const std::function<double(double)>& cdf);

// Asymptotic KS p-value with the Stephens finite-n correction.
double ks_pvalue(double d, std::size_t n);

}  // namespace cblre
