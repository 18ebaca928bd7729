#include <doctest.h>

#include <cmath>

#include "cblre/numerics.hpp"
#include "cblre/rng.hpp"

using namespace cblre;

TEST_CASE("adaptive simpson") {
  const double v = adaptive_simpson([](double x) { return std::exp(x); }, 0.0,
                                    1.0, 1e-12);
  CHECK(v == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  const double w = adaptive_simpson(
      [](double x) { return 1.0 / (1.0 + x * x); }, 0.0, 1.0, 1e-12);
  CHECK(w == doctest::Approx(std::atan(1.0)).epsilon(1e-11));
}

TEST_CASE("brent root") {
  const double r =
      brent_root([](double x) { return std::cos(x); }, 0.0, 2.0, 1e-14);
  CHECK(r == doctest::Approx(std::acos(0.0)).epsilon(1e-13));
  const double q = brent_root([](double x) { return x * x * x - 2.0; }, 0.0,
                              2.0, 1e-14);
  CHECK(q == doctest::Approx(std::cbrt(2.0)).epsilon(1e-13));
}

TEST_CASE("normal cdf") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(normal_cdf(1.959963985) == doctest::Approx(0.975).epsilon(1e-6));
}

TEST_CASE("ks statistic and p-value behave") {
  Rng rng(17);
  std::vector<double> samples(2000);
  for (auto& s : samples) s = rng.normal();
  const double d = ks_statistic(samples, normal_cdf);
  const double p = ks_pvalue(d, samples.size());
  CHECK(p > 0.01);  // true null

  for (auto& s : samples) s = rng.uniform() * 6.0 - 3.0;  // wrong law
  const double d2 = ks_statistic(samples, normal_cdf);
  CHECK(ks_pvalue(d2, samples.size()) < 1e-4);
}
