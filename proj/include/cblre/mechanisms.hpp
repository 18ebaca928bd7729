#pragma once

#include <functional>
#include <optional>
#include <string>

#include "cblre/jump_law.hpp"
#include "cblre/levy.hpp"
#include "cblre/rng.hpp"

namespace cblre {

enum class MechFamily { Feller, StableCB, FiniteActivity, Neveu };

// Branching mechanism
//   psi(l) = -q - a l + gamma2 l^2 + int (e^{-lx} - 1 + lx 1_{x<1}) mu(dx)
// with family-specific closed forms for psi, psi'(0+), psi0 and the
// restricted-measure quantities the jump-thinning simulator needs.
class BranchingMechanism {
 public:
  static BranchingMechanism feller(double a, double gamma2, double q = 0.0);
  // psi(l) = c l^alpha, alpha in (0,1) u (1,2], c (alpha - 1) > 0.
  static BranchingMechanism stable(double alpha, double c);
  // mu = rate * law with law supported on (0, inf).
  static BranchingMechanism finite_activity(double a, double gamma2,
                                            double rate, JumpLaw law,
                                            double q = 0.0);
  // mu given as a density on [lo, hi], tabulated.
  static BranchingMechanism finite_density(
      double a, double gamma2, const std::function<double(double)>& density,
      double lo, double hi, double q = 0.0);
  // psi(u) = u log u.
  static BranchingMechanism neveu();

  MechFamily family() const { return family_; }
  double linear_a() const { return a_; }
  double gamma2() const { return gamma2_; }
  double killing_q() const { return q_; }
  double stable_alpha() const { return alpha_; }
  double stable_c() const { return c_; }

  double psi(double lambda) const;
  double psi_prime0() const;  // may be -inf
  bool hypothesis_H() const;  // q = 0 and finite psi'(0+)
  double psi0(double lambda) const;       // throws when H fails
  double psi0_prime(double lambda) const;
  double Phi(double lambda) const;        // psi0(l)/l, Phi(0) = 0
  bool xlogx() const;

  bool has_jumps() const;
  // mu([delta, inf)); the killing atom q delta_inf is tracked separately.
  double jump_tail_mass(double delta) const;
  double sample_jump_tail(Rng& rng, double delta) const;
  // int_{[lo, hi)} z mu(dz)
  double jump_mean_between(double lo, double hi) const;
  // int_{(0, delta)} z^2 mu(dz)
  double jump_m2_below(double delta) const;

  std::string describe() const;

 private:
  BranchingMechanism() = default;

  MechFamily family_ = MechFamily::Feller;
  double a_ = 0.0;
  double gamma2_ = 0.0;
  double q_ = 0.0;
  double alpha_ = 0.0;      // StableCB
  double c_ = 0.0;          // StableCB
  double stable_C_ = 0.0;   // intensity constant c alpha (alpha-1) / Gamma(2-alpha)
  double rate_ = 0.0;       // FiniteActivity
  std::optional<JumpLaw> law_;
  // density-given measures keep the callback so integrals run at quadrature
  // precision; the tabulated law is only used for sampling
  std::function<double(double)> density_;
  double dlo_ = 0.0, dhi_ = 0.0;
  bool has_density_ = false;
};

class ImmigrationMechanism {
 public:
  // phi(u) = d u + rate * E[1 - e^{-u Z}], nu = rate * law on (0, inf).
  ImmigrationMechanism(double d, double rate, std::optional<JumpLaw> law);
  static ImmigrationMechanism drift_only(double d) {
    return ImmigrationMechanism(d, 0.0, std::nullopt);
  }

  double phi(double u) const;
  double d() const { return d_; }
  double rate() const { return rate_; }
  const std::optional<JumpLaw>& law() const { return law_; }
  bool empty() const { return d_ == 0.0 && rate_ == 0.0; }

 private:
  double d_;
  double rate_;
  std::optional<JumpLaw> law_;
};

enum class Criticality { Subcritical, Critical, Supercritical };

struct IntcondResult {
  double value = 0.0;
  bool converged = false;
  double cutoff = 0.0;
};

struct HypothesisReport {
  bool H = false;
  bool xlogx = false;
  IntcondResult intcond;
  bool A_evaluable = false;
  bool admissible = false;
  Criticality regime = Criticality::Critical;
  double env_mean = 0.0;
  std::string to_text() const;
};

HypothesisReport check_hypotheses(const BranchingMechanism& mech,
                                  const LevyTriplet& env);

// A(x) = m + pi((1,inf)) + int_1^x pi((y,inf)) dy, with T and U the tail
// moment functions feeding the CLT normalizers. The triplet is the
// K-variant one, so its raw drift is m.
struct TailFunctions {
  std::function<double(double)> A;
  std::function<double(double)> T;
  std::function<double(double)> U;
};

TailFunctions A_T_U(const LevyTriplet& env);

// Numeric check of the survival integral condition; doubles the cutoff
// until increments fall below 1e-8 or the cutoff passes 1e6.
IntcondResult integrate_intcond(const BranchingMechanism& mech,
                                const LevyTriplet& env);

}  // namespace cblre
