#include <doctest.h>

#include <cmath>

#include "cblre/mechanisms.hpp"

using namespace cblre;

namespace {

// independent quadrature reference: composite Simpson with Richardson
// extrapolation, no shared code with the library quadrature
double simpson_fixed(const std::function<double(double)>& f, double a, double b,
                     int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * h);
  return s * h / 3.0;
}

double richardson_reference(const std::function<double(double)>& f, double a,
                            double b) {
  const double c = simpson_fixed(f, a, b, 2048);
  const double fine = simpson_fixed(f, a, b, 4096);
  return fine + (fine - c) / 15.0;
}

}  // namespace

TEST_CASE("psi closed forms") {
  const auto feller = BranchingMechanism::feller(0.0, 1.0);
  CHECK(feller.psi(2.0) == doctest::Approx(4.0));

  const auto st = BranchingMechanism::stable(1.5, 1.0);
  CHECK(st.psi(4.0) == doctest::Approx(8.0));

  const auto killed = BranchingMechanism::feller(0.3, 1.0, 0.2);
  CHECK(killed.psi(0.0) == doctest::Approx(-0.2));
  CHECK_FALSE(killed.hypothesis_H());
}

TEST_CASE("psi0 and Phi") {
  const auto feller = BranchingMechanism::feller(0.5, 1.0);
  CHECK(feller.psi0(3.0) == doctest::Approx(9.0));
  CHECK(feller.Phi(3.0) == doctest::Approx(3.0));
  CHECK(feller.psi0(0.0) == 0.0);
  CHECK(feller.Phi(0.0) == 0.0);

  // psi0 = psi - lambda psi'(0+) for a finite-activity mechanism
  const auto fin = BranchingMechanism::finite_activity(
      0.2, 0.3, 1.5, JumpLaw::exponential(0.8));
  for (double l : {0.1, 1.0, 3.0}) {
    CHECK(fin.psi0(l) ==
          doctest::Approx(fin.psi(l) - l * fin.psi_prime0()).epsilon(1e-12));
    CHECK(fin.psi0(l) >= 0.0);
  }
}

TEST_CASE("density-measure psi0 against an independent quadrature oracle") {
  // mu(dx) = x^{-2} e^{-x} dx on [1, 40)
  auto dens = [](double x) { return std::pow(x, -2.0) * std::exp(-x); };
  const auto mech = BranchingMechanism::finite_density(0.0, 0.0, dens, 1.0, 40.0);
  const double lam = 1.0;
  const double ref = richardson_reference(
      [&](double x) {
        return (std::expm1(-lam * x) + lam * x) * dens(x);
      },
      1.0, 40.0);
  CHECK(mech.psi0(lam) == doctest::Approx(ref).epsilon(1e-8));
  CHECK(mech.hypothesis_H());
}

TEST_CASE("psi_prime0 per family") {
  CHECK(BranchingMechanism::feller(0.7, 1.0).psi_prime0() == doctest::Approx(-0.7));
  CHECK(BranchingMechanism::stable(1.5, 1.0).psi_prime0() == 0.0);
  CHECK(BranchingMechanism::stable(0.5, -1.0).psi_prime0() ==
        -std::numeric_limits<double>::infinity());
  CHECK(BranchingMechanism::neveu().psi_prime0() ==
        -std::numeric_limits<double>::infinity());
  // power-law tail with exponent -2.2: int x^{-1.2} over (1, H) is finite
  auto dens = [](double x) { return std::pow(x, -2.2); };
  const double H = 2e4;
  const auto m = BranchingMechanism::finite_density(0.0, 0.0, dens, 1.0, H);
  CHECK(m.hypothesis_H());
  const double expect = -5.0 * (1.0 - std::pow(H, -0.2));
  CHECK(m.psi_prime0() == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("mechanism convexity and monotonicity invariants") {
  const auto fin = BranchingMechanism::finite_activity(
      -0.4, 0.6, 2.0, JumpLaw::uniform(0.2, 3.0));
  double prev_phi = 0.0;
  for (double l = 1e-4; l <= 1e3; l *= 4.0) {
    const double h = l * 1e-4;
    const double dd = (fin.psi(l + h) - 2 * fin.psi(l) + fin.psi(l - h)) / (h * h);
    CHECK(dd >= -1e-8);
    const double phi = fin.Phi(l);
    CHECK(phi >= prev_phi - 1e-10);
    prev_phi = phi;
  }
}

TEST_CASE("immigration mechanism") {
  const auto none = ImmigrationMechanism::drift_only(1.0);
  CHECK(none.phi(0.0) == 0.0);
  CHECK(none.phi(5.0) == doctest::Approx(5.0));

  // nu = 2 delta_1: phi(1) = 2 (1 - e^{-1})
  const auto atom = ImmigrationMechanism(0.0, 2.0, JumpLaw::dirac(1.0));
  CHECK(atom.phi(1.0) == doctest::Approx(2.0 * (1.0 - std::exp(-1.0))).epsilon(1e-12));

  // concavity on a grid
  const auto mix = ImmigrationMechanism(0.3, 1.5, JumpLaw::exponential(0.7));
  for (double u = 0.1; u < 50.0; u *= 2.0) {
    const double h = u * 1e-4;
    const double dd = (mix.phi(u + h) - 2 * mix.phi(u) + mix.phi(u - h)) / (h * h);
    CHECK(dd <= 1e-8);
  }
  CHECK_THROWS(ImmigrationMechanism(0.0, 1.0, JumpLaw::normal(0.0, 1.0)));
}

TEST_CASE("A, T, U tail functions") {
  // pi = 0: A = m, T = 0, U = sigma^2
  const auto flat = LevyTriplet(0.8, 0.5, {}, EnvVariant::K);
  const auto tf0 = A_T_U(flat);
  CHECK(tf0.A(3.0) == doctest::Approx(0.8));
  CHECK(tf0.T(1.0) == 0.0);
  CHECK(tf0.U(2.0) == doctest::Approx(0.25));

  // atom of size +2 at rate 1
  const auto atom = LevyTriplet(0.3, 0.0, {{1.0, JumpLaw::dirac(2.0), false}},
                                EnvVariant::K);
  const auto tf = A_T_U(atom);
  CHECK(tf.T(1.0) == doctest::Approx(1.0));
  CHECK(tf.T(3.0) == doctest::Approx(0.0));
  CHECK(tf.A(2.0) == doctest::Approx(0.3 + 1.0 + 1.0).epsilon(1e-9));
  // U is non-decreasing
  double prev = 0.0;
  for (double x : {0.5, 1.0, 1.9, 2.5, 4.0}) {
    const double u = tf.U(x);
    CHECK(u >= prev - 1e-12);
    prev = u;
  }
}

TEST_CASE("hypothesis report") {
  const auto mech = BranchingMechanism::finite_activity(
      0.0, 0.5, 1.0, JumpLaw::uniform(0.1, 0.9));
  const auto critical = LevyTriplet(0.0, 0.4, {}, EnvVariant::K);
  auto rep = check_hypotheses(mech, critical);
  CHECK(rep.H);
  CHECK(rep.xlogx);
  CHECK(rep.regime == Criticality::Critical);

  const auto super = LevyTriplet(0.5, 0.4, {}, EnvVariant::K);
  rep = check_hypotheses(mech, super);
  CHECK(rep.regime == Criticality::Supercritical);
  CHECK(rep.intcond.converged);
  CHECK(rep.intcond.value > 0.0);
  CHECK(rep.to_text().find("supercritical") != std::string::npos);

  const auto sub = LevyTriplet(-0.5, 0.4, {}, EnvVariant::K);
  CHECK(check_hypotheses(mech, sub).regime == Criticality::Subcritical);
}
