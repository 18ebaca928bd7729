#include <doctest.h>

#include <cmath>

#include "cblre/asymptotics.hpp"

using namespace cblre;

namespace {
BranchingMechanism bounded_mech() {
  return BranchingMechanism::finite_activity(0.0, 0.6, 1.0,
                                             JumpLaw::uniform(0.1, 0.9));
}
}  // namespace

TEST_CASE("classification by drift sign") {
  const auto mech = bounded_mech();
  CHECK(classify(mech, LevyTriplet(-1.0, 0.1, {}, EnvVariant::K)).regime ==
        Regime::ExtinctionAS);
  CHECK(classify(mech, LevyTriplet(0.0, 0.4, {}, EnvVariant::K)).regime ==
        Regime::LiminfZero);
  const auto rep = classify(mech, LevyTriplet(0.5, 0.4, {}, EnvVariant::K));
  CHECK(rep.regime == Regime::SurvivalPossible);
  CHECK(rep.xlogx);
  CHECK(rep.intcond.converged);
  CHECK(rep.to_text().find("survival_possible") != std::string::npos);
  CHECK_THROWS(classify(BranchingMechanism::neveu(),
                        LevyTriplet(0.5, 0.4, {}, EnvVariant::K)));
}

TEST_CASE("classification is invariant under mass rescaling with compensated a") {
  // doubling mu's mass while keeping psi'(0+) fixed leaves the regime alone
  const auto law = JumpLaw::uniform(0.5, 2.0);
  const double rate = 1.0;
  const double tail_mean = rate * (law.mean() - law.mean_inside(0.0, 1.0));
  const auto m1 = BranchingMechanism::finite_activity(0.3, 0.5, rate, law);
  const auto m2 = BranchingMechanism::finite_activity(0.3 - tail_mean, 0.5,
                                                      2 * rate, law);
  CHECK(m1.psi_prime0() == doctest::Approx(m2.psi_prime0()).epsilon(1e-12));
  const auto env = LevyTriplet(0.4, 0.3, {}, EnvVariant::K);
  CHECK(classify(m1, env).regime == classify(m2, env).regime);
}

TEST_CASE("clt normalizers") {
  // pi = 0: a(t) = m t, b^2(t) = sigma^2 t
  const auto flat = LevyTriplet(0.7, 0.5, {}, EnvVariant::K);
  const auto n0 = clt_normalizers(flat, 4.0);
  CHECK(n0.a_t == doctest::Approx(2.8));
  CHECK(n0.b_t == doctest::Approx(1.0));

  // symmetric unit atoms: zero mean contribution, variance adds the rate
  const auto sym = LevyTriplet(
      0.7, 0.5, {{1.0, JumpLaw::two_point(-1.0, 0.5, 1.0), false}},
      EnvVariant::K);
  const auto n1 = clt_normalizers(sym, 2.0);
  CHECK(n1.a_t == doctest::Approx(1.4).epsilon(1e-12));
  CHECK(n1.b_t == doctest::Approx(std::sqrt((0.25 + 1.0) * 2.0)).epsilon(1e-12));

  // t = 0 degenerates to zero
  const auto nz = clt_normalizers(sym, 0.0);
  CHECK(nz.a_t == 0.0);
  CHECK(nz.b_t == 0.0);
}

TEST_CASE("doney-maller diagnostic ratio grows for light tails") {
  const auto env = LevyTriplet(
      0.5, 0.4, {{1.0, JumpLaw::normal(0.0, 0.3), false}}, EnvVariant::K);
  const double r10 = doney_maller_ratio(env, 10.0);
  CHECK(r10 > 1.0);
  CHECK(doney_maller_ratio(env, 100.0) >= r10);
}

TEST_CASE("clt_check rejects a deterministic environment") {
  CBLREConfig cfg;
  cfg.mech = BranchingMechanism::feller(0.5, 1.0);
  cfg.env = LevyTriplet(0.0, 0.0, {}, EnvVariant::S);
  cfg.dt = 1e-2;
  cfg.horizon = 4.0;
  CHECK_THROWS(clt_check(cfg, 4.0, 200, 1, 1e-6, 2));
}

TEST_CASE("clt_check flags too few survivors as inconclusive") {
  CBLREConfig cfg;
  cfg.mech = BranchingMechanism::feller(0.0, 1.0);
  cfg.env = make_environment(-1.5, 0.3, {}, EnvVariant::S);  // strongly subcritical
  cfg.z0 = 0.5;
  cfg.dt = 1e-2;
  cfg.horizon = 30.0;
  const auto rep = clt_check(cfg, 30.0, 150, 3, 1e-6, 2);
  CHECK_FALSE(rep.conclusive);
  CHECK(rep.survivors < 100);
}

TEST_CASE("subcritical runs die and W dichotomy holds supercritically") {
  // extinction: E[K_1] = -0.5 drives everything below 1e-6 by T = 50
  CBLREConfig sub;
  sub.mech = BranchingMechanism::feller(0.0, 1.0);
  sub.env = LevyTriplet(-0.5 + 0.5 * 0.3 * 0.3, 0.3, {}, EnvVariant::S);
  sub.z0 = 1.0;
  sub.dt = 1e-2;
  sub.horizon = 50.0;
  int dead = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const auto path = sample_path(sub.env, sub.horizon, sub.dt,
                                  stream_key(77, stream_tag::env_path, i));
    const auto traj = simulate(sub, path, stream_key(77, stream_tag::branching, i));
    dead += traj.final_value() < 1e-6;
  }
  CHECK(double(dead) / n >= 0.9);

  // supercritical: {Z_T e^{-K_T} small} and {Z_T small} agree on most paths
  CBLREConfig super = sub;
  super.mech = BranchingMechanism::feller(0.3, 1.0);
  super.env = LevyTriplet(0.4, 0.3, {}, EnvVariant::S);
  super.horizon = 30.0;
  const double psi0p = super.mech.psi_prime0();
  int agree = 0;
  for (int i = 0; i < 500; ++i) {
    const auto path = sample_path(super.env, super.horizon, super.dt,
                                  stream_key(88, stream_tag::env_path, i));
    const auto traj =
        simulate(super, path, stream_key(88, stream_tag::branching, i));
    const double kT = path.final_value() - psi0p * super.horizon;
    const bool w_zero = traj.final_value() * std::exp(-kT) < 1e-6;
    const bool z_zero = traj.final_value() < 1e-6;
    agree += w_zero == z_zero;
  }
  CHECK(double(agree) / 500.0 >= 0.97);
}

TEST_CASE("clt_check standardizes supercritical log sizes") {
  CBLREConfig cfg;
  cfg.mech = BranchingMechanism::feller(0.4, 0.3);
  cfg.env = make_environment(
      2.0, 1.5, {{0.5, JumpLaw::normal(0.0, 0.3), false}}, EnvVariant::S, -0.4);
  cfg.z0 = 1.0;
  cfg.dt = 2e-2;
  cfg.z_max = 1e80;
  const double t = 30.0;
  cfg.horizon = t;
  const auto rep = clt_check(cfg, t, 600, 5, 1e-6, 2);
  CHECK(rep.conclusive);
  CHECK(rep.survivors > 300);
  // plumbing check at desk scale; the acceptance suite holds the p-value bar
  CHECK(rep.ks_stat < 0.1);
  CHECK(rep.p_value > 1e-3);
}
