#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cblre/levy.hpp"
#include "cblre/mc.hpp"

using namespace cblre;

namespace {
LevyTriplet brownian(double drift, double sigma,
                     EnvVariant v = EnvVariant::K0) {
  return LevyTriplet(drift, sigma, {}, v);
}
}  // namespace

TEST_CASE("make_environment drift formulas") {
  // pure Brownian variant K with psi'(0+) = 0: m = -sigma^2/2
  const auto k = make_environment(0.0, 1.0, {}, EnvVariant::K, 0.0);
  CHECK(k.drift() == doctest::Approx(-0.5));

  // deterministic zero process
  const auto z = make_environment(0.0, 0.0, {}, EnvVariant::K0);
  CHECK(z.drift() == 0.0);
  const auto p = sample_path(z, 1.0, 0.25, 99);
  for (double v : p.values) CHECK(v == 0.0);

  // unit atoms sit outside the open compensation window, so no correction
  const auto a = make_environment(
      1.0, 0.0, {{1.0, JumpLaw::dirac(1.0), false}}, EnvVariant::K0);
  CHECK(a.drift() == doctest::Approx(1.0));
  CHECK(a.effective_drift() == doctest::Approx(1.0));

  // variant K requires psi'(0+)
  CHECK_THROWS(make_environment(0.0, 1.0, {}, EnvVariant::K));

  // half-unit atoms are compensated: effective drift loses rate * z
  const auto b = make_environment(
      1.0, 0.0, {{2.0, JumpLaw::dirac(0.5), false}}, EnvVariant::K0);
  CHECK(b.drift() ==
        doctest::Approx(1.0 - 2.0 * (std::exp(0.5) - 1.0 - 0.5)).epsilon(1e-12));
  CHECK(b.effective_drift() == doctest::Approx(b.drift() - 1.0).epsilon(1e-12));
}

TEST_CASE("deterministic path and reproducibility") {
  const auto t = brownian(1.0, 0.0);
  const auto p = sample_path(t, 2.0, 0.1, 7);
  CHECK(p.final_value() == doctest::Approx(2.0).epsilon(1e-14));
  for (double j : p.jump_at) CHECK(j == 0.0);

  const auto mix = LevyTriplet(
      0.2, 0.4, {{1.5, JumpLaw::normal(0.0, 0.3), false}}, EnvVariant::K0);
  const auto p1 = sample_path(mix, 3.0, 0.01, 12345);
  const auto p2 = sample_path(mix, 3.0, 0.01, 12345);
  REQUIRE(p1.times.size() == p2.times.size());
  for (std::size_t i = 0; i < p1.times.size(); ++i) {
    CHECK(p1.times[i] == p2.times[i]);
    CHECK(p1.values[i] == p2.values[i]);
  }
  const auto p3 = sample_path(mix, 3.0, 0.01, 12346);
  CHECK(p3.final_value() != p1.final_value());
}

TEST_CASE("path recompute invariant") {
  const auto mix = LevyTriplet(
      -0.3, 0.6, {{2.0, JumpLaw::uniform(0.1, 2.0), true}}, EnvVariant::K0);
  const auto p = sample_path(mix, 2.0, 0.05, 4242);
  double k = 0.0;
  for (std::size_t i = 0; i + 1 < p.times.size(); ++i) {
    const double len = p.times[i + 1] - p.times[i];
    k += p.drift_effective * len + p.sigma * p.brownian[i] + p.jump_at[i + 1];
  }
  CHECK(k == doctest::Approx(p.final_value()).epsilon(1e-12));
}

TEST_CASE("sampled moments match triplet rates") {
  // E K(1) within 4 SE of drift + sum(rate * mean); same for the variance
  const auto trip = LevyTriplet(
      0.3, 0.5, {{1.5, JumpLaw::normal(0.1, 0.3), true}}, EnvVariant::K0);
  const int n = 100000;
  Accumulator acc;
  Accumulator cnt;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_path(trip, 1.0, 0.5, 1000 + i);
    acc.add(p.final_value());
    int jumps = 0;
    for (double j : p.jump_at) jumps += j != 0.0;
    cnt.add(jumps);
  }
  const auto est = acc.estimate();
  CHECK(std::abs(est.mean - trip.mean_rate()) < 4 * est.se);
  const double var = acc.variance();
  const double var_se = var * std::sqrt(2.0 / (n - 1));
  CHECK(std::abs(var - trip.variance_rate()) < 5 * var_se);
  const auto cest = cnt.estimate();
  CHECK(std::abs(cest.mean - 1.5) < 4 * cest.se);
}

TEST_CASE("jump count law") {
  // CP(rate 2, jumps -1): mean count over [0,1] is 2
  const auto trip = LevyTriplet(0.0, 0.0, {{2.0, JumpLaw::dirac(-1.0), false}},
                                EnvVariant::K0);
  Accumulator cnt;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_path(trip, 1.0, 1.0, 555 + i);
    int jumps = 0;
    for (double j : p.jump_at) jumps += j != 0.0;
    cnt.add(jumps);
    CHECK(p.final_value() == doctest::Approx(-double(jumps)));
  }
  const auto est = cnt.estimate();
  CHECK(std::abs(est.mean - 2.0) < 3 * est.se);
}

TEST_CASE("laplace exponents") {
  const auto bm = brownian(-1.0, 1.0);
  CHECK(bm.psi_hat(2.0) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(bm.psi(0.0) == 0.0);

  const auto cp = LevyTriplet(0.0, 0.0, {{1.0, JumpLaw::dirac(1.0), false}},
                              EnvVariant::K0);
  CHECK(cp.psi(1.0) == doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-12));
  CHECK(cp.psi(0.0) == 0.0);

  // MC cross-check of E[e^{K_1}]
  Accumulator acc;
  for (int i = 0; i < 50000; ++i) {
    const auto p = sample_path(cp, 1.0, 1.0, 31 + i);
    acc.add(std::exp(p.final_value()));
  }
  const auto est = acc.estimate();
  CHECK(std::abs(est.mean - std::exp(cp.psi(1.0))) < 4 * est.se);

  // convexity on a grid
  const auto mix = LevyTriplet(
      0.1, 0.4, {{0.7, JumpLaw::normal(0.0, 0.5), true}}, EnvVariant::K0);
  for (double q = -2.0; q <= 2.0; q += 0.25) {
    const double h = 1e-4;
    const double dd =
        (mix.psi(q + h) - 2.0 * mix.psi(q) + mix.psi(q - h)) / (h * h);
    CHECK(dd >= -1e-8);
  }

  // moment-domain guard
  const auto heavy = LevyTriplet(
      0.0, 0.0, {{1.0, JumpLaw::exponential(1.0), false}}, EnvVariant::K0);
  CHECK_THROWS(heavy.psi(1.5));
}

TEST_CASE("esscher kappa closed-form roots") {
  // psi_hat(u) = u + u^2/2, lambda=1: kappa = sqrt(3) - 1
  CHECK(esscher_kappa(brownian(-1.0, 1.0), 1.0) ==
        doctest::Approx(std::sqrt(3.0) - 1.0).epsilon(1e-10));
  // lambda = 0 with downward drift: kappa = 0
  CHECK(esscher_kappa(brownian(-1.0, 1.0), 0.0) == 0.0);
  // psi_hat(u) = 2u + u^2/2, lambda=2: kappa = -2 + sqrt(8)
  CHECK(esscher_kappa(brownian(-2.0, 1.0), 2.0) ==
        doctest::Approx(-2.0 + std::sqrt(8.0)).epsilon(1e-10));

  // kappa is a right inverse of psi_hat
  const auto trip = LevyTriplet(
      -1.5, 0.8, {{0.5, JumpLaw::exponential(1.0), false}}, EnvVariant::K0);
  for (double lam : {0.1, 0.5, 1.0, 2.0, 4.0}) {
    const double kap = esscher_kappa(trip, lam);
    CHECK(std::abs(trip.psi_hat(kap) - lam) <= 1e-10);
  }
}

TEST_CASE("esscher tilt transforms the triplet correctly") {
  // identity tilt
  const auto bm = brownian(-1.0, 1.0);
  CHECK(esscher_tilt(bm, 0.0).drift() == doctest::Approx(-1.0));
  // Brownian tilt shifts drift by -kappa sigma^2
  CHECK(esscher_tilt(bm, 1.0).drift() == doctest::Approx(-2.0));

  // CP(1, exp(1)) with kappa = 1/2: rate 2/3, law exp(mean 2/3)
  const auto cp = LevyTriplet(0.0, 0.0, {{1.0, JumpLaw::exponential(1.0), false}},
                              EnvVariant::K0);
  const auto t = esscher_tilt(cp, 0.5);
  REQUIRE(t.components().size() == 1);
  CHECK(t.components()[0].rate == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(t.components()[0].law.mean() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));

  // tilted exponent identity psi_hat_t(u) = psi_hat(kappa+u) - psi_hat(kappa)
  const auto trip = LevyTriplet(
      -1.2, 0.7,
      {{0.8, JumpLaw::exponential(0.9), false}, {0.4, JumpLaw::dirac(0.6), true}},
      EnvVariant::K0);
  const double kap = 0.7;
  const auto tt = esscher_tilt(trip, kap);
  for (double u : {0.0, 0.3, 1.0, 2.5}) {
    CHECK(std::abs(tt.psi_hat(u) - (trip.psi_hat(kap + u) - trip.psi_hat(kap))) <=
          1e-10);
  }
}

TEST_CASE("exp_functional") {
  // K_s = s: int_0^1 e^s ds = e - 1
  const auto p1 = sample_path(brownian(1.0, 0.0), 1.0, 1e-3, 1);
  CHECK(exp_functional(p1, +1) ==
        doctest::Approx(std::exp(1.0) - 1.0).epsilon(1e-6));

  // K = 0: integral equals the horizon
  const auto p0 = sample_path(brownian(0.0, 0.0), 3.0, 0.5, 1);
  CHECK(exp_functional(p0, +1) == doctest::Approx(3.0).epsilon(1e-14));

  // K_s = -2s over a long horizon: 1/2 within 1e-6
  const auto p2 = sample_path(brownian(-2.0, 0.0), 20.0, 1e-3, 1);
  CHECK(exp_functional(p2, +1) == doctest::Approx(0.5).epsilon(2e-6));

  // sign flip
  CHECK(exp_functional(p1, -1) ==
        doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("exp_functional additivity across a split") {
  // deterministic path: int_0^T = int_0^t + e^{K_t} int of the shifted tail
  const double drift = 0.7;
  const auto whole = sample_path(brownian(drift, 0.0), 2.0, 0.01, 3);
  const auto head = sample_path(brownian(drift, 0.0), 0.8, 0.01, 3);
  const auto tail = sample_path(brownian(drift, 0.0), 1.2, 0.01, 3);
  const double lhs = exp_functional(whole, +1);
  const double rhs = exp_functional(head, +1) +
                     std::exp(drift * 0.8) * exp_functional(tail, +1);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("variant views shift by the deterministic drift only") {
  const auto trip = LevyTriplet(
      0.4, 0.5, {{1.0, JumpLaw::normal(0.0, 0.4), true}}, EnvVariant::K0);
  const auto p0 = sample_path(trip, 2.0, 0.01, 77);
  const double psi0p = -0.3;
  const auto pk = as_variant(p0, EnvVariant::K, psi0p);
  for (std::size_t i = 0; i < p0.times.size(); ++i) {
    CHECK(pk.values[i] ==
          doctest::Approx(p0.values[i] - psi0p * p0.times[i]).epsilon(1e-12));
  }
  const auto back = as_variant(pk, EnvVariant::K0, psi0p);
  CHECK(back.values.back() == doctest::Approx(p0.values.back()).epsilon(1e-12));
  CHECK_THROWS(as_variant(p0, EnvVariant::K));
}

TEST_CASE("variant S carries the Doleans-Dade drift") {
  // S triplet: alpha = 0.3, sigma = 0.5, no jumps -> effective alpha - s^2/2
  const auto s = make_environment(0.3, 0.5, {}, EnvVariant::S);
  CHECK(s.drift() == doctest::Approx(0.3));
  CHECK(s.effective_drift() == doctest::Approx(0.3 - 0.125));
  // with jumps: subtract int (e^v - 1) over the window
  const auto sj = make_environment(
      0.3, 0.0, {{1.0, JumpLaw::dirac(0.5), false}}, EnvVariant::S);
  CHECK(sj.effective_drift() ==
        doctest::Approx(0.3 - (std::exp(0.5) - 1.0)).epsilon(1e-12));
}

TEST_CASE("gaussian small-jump correction adds the declared variance") {
  const double extra = 0.3;
  const LevyTriplet trip(0.0, 0.2, {}, EnvVariant::K0, std::nullopt, extra);
  Accumulator off, on;
  for (int i = 0; i < 40000; ++i) {
    off.add(sample_path(trip, 1.0, 0.25, 600 + i).final_value());
    PathOptions opt;
    opt.gaussian_correction = true;
    on.add(sample_path(trip, 1.0, 0.25, 600 + i, opt).final_value());
  }
  const double v_off = off.variance();
  const double v_on = on.variance();
  CHECK(std::abs(v_off - 0.04) < 4 * 0.04 * std::sqrt(2.0 / 40000));
  CHECK(std::abs(v_on - 0.34) < 4 * 0.34 * std::sqrt(2.0 / 40000));
}

TEST_CASE("running exponential functional matches the total") {
  const auto trip = LevyTriplet(0.3, 0.4, {{1.0, JumpLaw::dirac(0.4), false}},
                                EnvVariant::K0);
  const auto path = sample_path(trip, 2.0, 0.01, 9);
  const auto run = exp_functional_running(path, +1);
  CHECK(run.front() == 0.0);
  CHECK(run.back() == doctest::Approx(exp_functional(path, +1)).epsilon(1e-14));
  for (std::size_t i = 1; i < run.size(); ++i) CHECK(run[i] >= run[i - 1]);
}

TEST_CASE("path csv export shape") {
  const auto p = sample_path(
      LevyTriplet(0.0, 0.0, {{3.0, JumpLaw::dirac(1.0), false}}, EnvVariant::K0),
      1.0, 0.25, 8);
  std::ostringstream os;
  write_path_csv(p, os);
  const std::string s = os.str();
  CHECK(s.rfind("time,K,jump_flag\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 1 + long(p.times.size()));
}
