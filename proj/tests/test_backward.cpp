#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cblre/backward.hpp"
#include "cblre/sde.hpp"

using namespace cblre;

namespace {

EnvironmentPath zero_path(double T, double dt) {
  return sample_path(LevyTriplet(0.0, 0.0, {}, EnvVariant::K0), T, dt, 1);
}

LevyTriplet cp_env() {
  return LevyTriplet(0.3, 0.0, {{2.0, JumpLaw::normal(0.0, 0.5), false}},
                     EnvVariant::K0);
}

}  // namespace

TEST_CASE("lambda zero solves to the zero function") {
  const auto path = zero_path(1.0, 1e-2);
  const auto mech = BranchingMechanism::feller(0.0, 1.0);
  const auto sol = solve_v(path, 1.0, 0.0, mech);
  for (double v : sol.v) CHECK(v == 0.0);
}

TEST_CASE("Feller backward solution has the separable closed form") {
  // v(s) = lambda / (1 + gamma^2 lambda (t - s)) along K = 0
  const auto path = zero_path(1.0, 1e-3);
  const auto mech = BranchingMechanism::feller(0.0, 1.0);
  const auto sol = solve_v(path, 1.0, 1.0, mech);
  CHECK(sol.v0() == doctest::Approx(0.5).epsilon(1e-9));
  for (std::size_t i = 0; i < sol.s.size(); i += 97) {
    const double expect = 1.0 / (1.0 + (1.0 - sol.s[i]));
    CHECK(sol.v[i] == doctest::Approx(expect).epsilon(1e-8));
  }
  CHECK(sol.stats.err_estimate <= 1e-8);
}

TEST_CASE("alpha = 2 stable equals the Feller mechanism pathwise") {
  const auto path = sample_path(cp_env(), 1.0, 1e-2, 17);
  const auto feller = BranchingMechanism::feller(0.0, 1.0);
  const auto stable2 = BranchingMechanism::stable(2.0, 1.0);
  const auto a = solve_v(path, 1.0, 1.3, feller);
  const auto b = solve_v(path, 1.0, 1.3, stable2);
  REQUIRE(a.s.size() == b.s.size());
  for (std::size_t i = 0; i < a.s.size(); ++i) {
    CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-10));
  }
}

TEST_CASE("conditional laplace values") {
  const auto path = zero_path(1.0, 1e-3);
  const auto mech = BranchingMechanism::feller(0.0, 1.0);
  // lambda = 0 and no immigration: identity 1
  CHECK(conditional_laplace(path, 1.0, 0.0, 1.0, mech, std::nullopt) == 1.0);
  // no immigration: exp(-z v(0))
  CHECK(conditional_laplace(path, 1.0, 1.0, 1.0, mech, std::nullopt) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-9));
  // drift immigration d=1: exp(-0.5 - log 2)
  const auto imm = ImmigrationMechanism::drift_only(1.0);
  CHECK(conditional_laplace(path, 1.0, 1.0, 1.0, mech, imm) ==
        doctest::Approx(std::exp(-0.5 - std::log(2.0))).epsilon(1e-7));
}

TEST_CASE("conditional laplace with exponential immigration") {
  // phi(u) = rate u/(1+u) along v(r) = 1/(2-r) integrates to rate log(3/2)
  const auto path = zero_path(1.0, 1e-3);
  const auto mech = BranchingMechanism::feller(0.0, 1.0);
  const auto imm = ImmigrationMechanism(0.0, 0.8, JumpLaw::exponential(1.0));
  const double expect = std::exp(-0.5 - 0.8 * std::log(1.5));
  CHECK(conditional_laplace(path, 1.0, 1.0, 1.0, mech, imm) ==
        doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("identity holds for a jump-bearing mechanism") {
  // branching jumps via thinning + compensator against the psi0 engine
  CBLREConfig sim;
  sim.z0 = 1.0;
  sim.mech = BranchingMechanism::finite_activity(0.1, 0.4, 1.5,
                                                 JumpLaw::exponential(0.5));
  sim.env = make_environment(0.0, 0.3, {{1.0, JumpLaw::normal(0.0, 0.2), false}},
                             EnvVariant::S);
  sim.horizon = 1.0;
  sim.dt = 1e-3;
  sim.delta = 0.01;
  sim.small_jump = SmallJumpMode::GaussianCorrection;
  const double lambda = 1.0;
  const double psi0p = sim.mech.psi_prime0();
  for (int e = 0; e < 2; ++e) {
    const auto ps = sample_path(sim.env, 1.0, sim.dt, stream_key(7, 1, e));
    const auto pk = as_variant(ps, EnvVariant::K, psi0p);
    const double closed =
        conditional_laplace(pk, 1.0, lambda, 1.0, sim.mech, std::nullopt);
    const double k_t = pk.values.back();
    Accumulator acc;
    for (int r = 0; r < 4000; ++r) {
      const auto traj = simulate(sim, ps, stream_key(7, 2, e, r));
      const double z = traj.final_value();
      acc.add(std::isfinite(z) ? std::exp(-lambda * z * std::exp(-k_t)) : 0.0);
    }
    const auto est = acc.estimate();
    CHECK(std::abs(est.mean - closed) < 3.5 * est.se);
  }
}

TEST_CASE("monotone in lambda and theorem bounds hold") {
  const auto path = sample_path(cp_env(), 1.0, 1e-2, 23);
  const auto mech = BranchingMechanism::finite_activity(
      0.1, 0.8, 1.0, JumpLaw::exponential(0.6));
  const auto s1 = solve_v(path, 1.0, 0.7, mech);
  const auto s2 = solve_v(path, 1.0, 1.9, mech);
  for (double s = 0.0; s <= 1.0; s += 0.05) {
    CHECK(s1.at(s) <= s2.at(s) + 1e-12);
  }
  // v <= lambda and v non-decreasing in s come out of the solver run
  for (std::size_t i = 0; i + 1 < s2.s.size(); ++i) {
    CHECK(s2.v[i] <= s2.v[i + 1] + 1e-12);
    CHECK(s2.v[i] <= 1.9 + 1e-12);
  }
}

TEST_CASE("pathwise stability under uniform perturbation") {
  // Gronwall-style: shifting K uniformly by eta moves v(0) by at most C eta
  const auto mech = BranchingMechanism::feller(0.0, 1.0);
  const double eta = 1e-4;
  double worst_ratio = 0.0;
  for (int p = 0; p < 20; ++p) {
    auto path = sample_path(cp_env(), 1.0, 1e-2, 300 + p);
    const double v0 = solve_v(path, 1.0, 1.0, mech).v0();
    for (auto& v : path.values) v += eta;
    const double v0p = solve_v(path, 1.0, 1.0, mech).v0();
    worst_ratio = std::max(worst_ratio, std::abs(v0p - v0) / eta);
  }
  CHECK(worst_ratio > 0.0);
  CHECK(worst_ratio < 100.0);
}

TEST_CASE("neveu closed form") {
  // K = 0, t = ln 2, lambda = 4, s = 0: v = sqrt(4) = 2
  const auto path = zero_path(std::log(2.0), 1e-3);
  CHECK(neveu_v(path, std::log(2.0), 4.0, 0.0) ==
        doctest::Approx(2.0).epsilon(1e-12));
  // lambda = 1: v is identically 1
  for (double s : {0.0, 0.2, 0.5}) {
    CHECK(neveu_v(path, 0.6, 1.0, s) == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK_THROWS(neveu_v(path, 0.5, 0.0, 0.0));
  // laplace identity with the zero path
  CHECK(neveu_laplace(1.5, 3.0, path, 0.6) ==
        doctest::Approx(std::exp(-1.5 * std::pow(3.0, std::exp(-0.6))))
            .epsilon(1e-12));
}

TEST_CASE("neveu closed form agrees with the generic backward solver") {
  const auto mech = BranchingMechanism::neveu();
  for (int p = 0; p < 3; ++p) {
    const auto path = sample_path(cp_env(), 1.0, 1e-3, 900 + p);
    for (double lam : {0.5, 1.0, 4.0}) {
      const auto sol = solve_v_full(path, 1.0, lam, mech);
      double sup = 0.0;
      for (std::size_t i = 0; i < sol.s.size(); i += 11) {
        sup = std::max(sup,
                       std::abs(sol.v[i] - neveu_v(path, 1.0, lam, sol.s[i])));
      }
      CHECK(sup <= 1e-6);
    }
  }
}

TEST_CASE("neveu extinction estimator") {
  // degenerate environment: Y = 0 so the estimate is e^{-z} exactly
  const auto zero = LevyTriplet(0.0, 0.0, {}, EnvVariant::K0);
  const auto ext = neveu_extinction(1.0, zero, 10.0, 0.1, 200, 5, 2);
  CHECK(ext.estimate.mean == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  CHECK(ext.estimate.se == doctest::Approx(0.0));

  // z -> 0 drives the estimate to 1
  const auto tiny = neveu_extinction(1e-12, zero, 10.0, 0.1, 200, 5, 2);
  CHECK(tiny.estimate.mean == doctest::Approx(1.0).epsilon(1e-9));

  // stochastic case against a finer-resolution run of the same estimator
  const auto bm = LevyTriplet(-1.0, 1.0, {}, EnvVariant::K0);
  const auto coarse = neveu_extinction(1.0, bm, 20.0, 1e-2, 4000, 6, 2);
  const auto fine = neveu_extinction(1.0, bm, 20.0, 2e-3, 4000, 7, 2);
  const double se = std::hypot(coarse.estimate.se, fine.estimate.se);
  CHECK(std::abs(coarse.estimate.mean - fine.estimate.mean) < 3 * se);
  CHECK(coarse.truncation_bound < 1e-7);
}

TEST_CASE("stable closed forms") {
  // alpha = 2 matches the Feller formula lambda/(1+lambda t)
  const auto path = zero_path(1.0, 1e-3);
  for (double lam : {0.5, 1.0, 3.0}) {
    CHECK(stable_v(path, 1.0, 0.0, lam, 2.0, 1.0) ==
          doctest::Approx(lam / (1.0 + lam)).epsilon(1e-9));
  }
  // alpha = 1.5, c = 1, K = 0, t = 2, z = 1: survival = 1 - e^{-1}
  const auto path2 = zero_path(2.0, 1e-3);
  const auto probs = stable_probs(1.0, path2, 2.0, 1.5, 1.0);
  CHECK(probs.survival == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-9));
  CHECK(probs.non_explosion == 1.0);
  // alpha < 1: survival is certain, explosion possible
  const auto probs2 = stable_probs(1.0, path2, 2.0, 0.5, -1.0);
  CHECK(probs2.survival == 1.0);
  CHECK(probs2.non_explosion < 1.0);
  CHECK(probs2.non_explosion > 0.0);
  CHECK_THROWS(stable_v(path2, 2.0, 0.0, 1.0, 1.0, 1.0));
}

TEST_CASE("stable closed form agrees with the generic backward solver") {
  const auto mech = BranchingMechanism::stable(1.5, 1.0);
  for (int p = 0; p < 3; ++p) {
    const auto path = sample_path(cp_env(), 1.0, 1e-3, 1200 + p);
    for (double lam : {0.5, 1.0, 4.0}) {
      const auto sol = solve_v_full(path, 1.0, lam, mech);
      double sup = 0.0;
      for (std::size_t i = 0; i < sol.s.size(); i += 11) {
        sup = std::max(
            sup, std::abs(sol.v[i] - stable_v(path, 1.0, sol.s[i], lam, 1.5, 1.0)));
      }
      CHECK(sup <= 1e-6);
    }
  }
}

TEST_CASE("vsolution csv export") {
  const auto path = zero_path(1.0, 1e-2);
  const auto sol = solve_v(path, 1.0, 1.0, BranchingMechanism::feller(0.0, 1.0));
  std::ostringstream os;
  write_vsolution_csv(sol, os);
  CHECK(os.str().rfind("s,v\n", 0) == 0);
}

TEST_CASE("hypothesis (H) gate") {
  const auto path = zero_path(1.0, 1e-2);
  CHECK_THROWS(solve_v(path, 1.0, 1.0, BranchingMechanism::neveu()));
  CHECK_THROWS(solve_v(path, 1.0, 1.0, BranchingMechanism::stable(0.5, -1.0)));
}
