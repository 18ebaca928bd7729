#include "cblre/rng.hpp"

#include <stdexcept>

namespace cblre {

namespace {

long long poisson_inversion(Rng& rng, double mean) {
  long long k = 0;
  double p = std::exp(-mean);
  double s = p;
  const double u = rng.uniform();
  while (u > s) {
    ++k;
    p *= mean / static_cast<double>(k);
    s += p;
    if (k > 1000) break;  // u ~ 1 round-off guard
  }
  return k;
}

// PTRD (Hoermann 1993), valid for mean >= 10.
long long poisson_ptrd(Rng& rng, double mean) {
  const double smu = std::sqrt(mean);
  const double b = 0.931 + 2.53 * smu;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  const double log_mu = std::log(mean);
  for (;;) {
    double u = rng.uniform() - 0.5;
    double v = rng.uniform();
    const double us = 0.5 - std::abs(u);
    const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long long>(kf);
    if (kf < 0.0 || (us < 0.013 && v > us)) continue;
    const double k = kf;
    if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
        k * log_mu - mean - std::lgamma(k + 1.0)) {
      return static_cast<long long>(kf);
    }
  }
}

}  // namespace

long long Rng::poisson(double mean) {
  if (!(mean >= 0.0)) throw std::invalid_argument("poisson: mean must be >= 0");
  if (mean == 0.0) return 0;
  if (mean < 10.0) return poisson_inversion(*this, mean);
  if (mean < 1e8) return poisson_ptrd(*this, mean);
  const double x = mean + std::sqrt(mean) * normal();
  return static_cast<long long>(std::llround(x < 0.0 ? 0.0 : x));
}

}  // namespace cblre
