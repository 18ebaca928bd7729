#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "cblre/levy.hpp"
#include "cblre/mc.hpp"
#include "cblre/mechanisms.hpp"

namespace cblre {

struct SolveOptions {
  double max_step = 1e-3;
  double rel_tol = 1e-10;          // per-step Richardson acceptance
  double richardson_target = 1e-8; // accumulated relative error bound
};

struct SolverStats {
  double max_step_used = 0.0;
  long long steps = 0;
  long long rejects = 0;
  double err_estimate = 0.0;  // accumulated half-step estimate, relative
};

// Backward solution v_t(s, lambda, K) on [0, t], stored ascending in s.
// k[i] is the path value used on the local segment (left limits at jumps),
// so the immigration integral can reuse the solver grid directly.
struct VSolution {
  double t = 0.0;
  double lambda = 0.0;
  std::vector<double> s;
  std::vector<double> v;
  std::vector<double> k;
  SolverStats stats;

  double v0() const { return v.front(); }
  double at(double si) const;  // linear interpolation
};

// d v / d s = e^{K_s} psi0(v e^{-K_s}), v(t) = lambda, integrated backward
// with order-4 steps restarting exactly at the path's jump epochs.
// Enforces v <= lambda and the Phi lower bound; violations beyond tolerance
// abort. Requires hypothesis (H).
VSolution solve_v(const EnvironmentPath& path, double t, double lambda,
                  const BranchingMechanism& mech, const SolveOptions& opts = {});

// Same machinery with the full psi (for infinite-mean mechanisms along K0);
// no monotonicity or cap enforcement, existence is the caller's concern.
VSolution solve_v_full(const EnvironmentPath& path, double t, double lambda,
                       const BranchingMechanism& mech,
                       const SolveOptions& opts = {});

// exp{-z v(0) - int_0^t phi(v(r) e^{-K_r}) dr}; the phi integral shares the
// solver grid.
double conditional_laplace(const EnvironmentPath& path, double z, double lambda,
                           double t, const BranchingMechanism& mech,
                           const std::optional<ImmigrationMechanism>& imm,
                           const SolveOptions& opts = {});

// Neveu closed forms (psi(u) = u log u along K0).
double neveu_v(const EnvironmentPath& path_k0, double t, double lambda,
               double s);
double neveu_laplace(double z, double lambda, const EnvironmentPath& path_k0,
                     double t);

struct NeveuExtinction {
  MCEstimate estimate;
  double truncation_bound = 0.0;  // e^{-T} E|K_T| proxy
};
NeveuExtinction neveu_extinction(double z, const LevyTriplet& triplet_k0,
                                 double T_trunc, double dt, int n_mc,
                                 std::uint64_t seed, int threads = 0);

// Self-similar (stable) closed forms along K0.
double stable_v(const EnvironmentPath& path_k0, double t, double s,
                double lambda, double alpha, double c);

struct StableProbs {
  double survival = 0.0;
  double non_explosion = 0.0;
};
StableProbs stable_probs(double z, const EnvironmentPath& path_k0, double t,
                         double alpha, double c);

// Conditional survival over (t0, t] from state z_state at t0, alpha > 1:
//   1 - exp{-z_state ((alpha-1) c int_{t0}^t e^{-(alpha-1)(K_u - K_{t0})} du)
//           ^{-1/(alpha-1)}}.
// Averaging this over simulated states at t0 Rao-Blackwellizes the survival
// indicator at t, which sidesteps the lingering-path resolution limit of
// threshold counting under a truncated jump measure.
double stable_survival_from(double z_state, const EnvironmentPath& path_k0,
                            double t0, double t, double alpha, double c);

// Exact integrals over the piecewise-linear realized path:
// int_{s0}^{s1} e^{coeff K_u} du and int_{s0}^{s1} e^{-u} K_u du.
double integral_exp_of_K(const EnvironmentPath& path, double s0, double s1,
                         double coeff);
double integral_expdecay_times_K(const EnvironmentPath& path, double s0,
                                 double s1);

void write_vsolution_csv(const VSolution& sol, std::ostream& os);

}  // namespace cblre
