#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cblre/jump_law.hpp"
#include "cblre/rng.hpp"

namespace cblre {

// Which process a triplet (and the paths sampled from it) represents:
//   S  -- the raw environment driver; paths carry its Doleans-Dade exponent
//         so that e^{K} is exactly the multiplicative environment factor;
//   K  -- the auxiliary process with the -psi'(0+) mean-growth correction;
//   K0 -- the auxiliary process without that correction.
// S and K0 paths coincide; K differs by a deterministic drift.
enum class EnvVariant { S, K, K0 };

// One finite-activity piece of the jump measure: either a compound-Poisson
// family or a density truncated away from 0 (so its total mass is finite).
// `compensated` means the part of the measure inside the open window (-1,1)
// is compensated; the component then contributes -t * int_{(-1,1)} z pi(dz)
// of drift to assembled paths.
struct JumpComponent {
  double rate;
  JumpLaw law;
  bool compensated = false;

  double mean_in_window() const { return rate * law.mean_inside(-1.0, 1.0); }
};

class LevyTriplet {
 public:
  LevyTriplet(double drift, double gaussian_sd, std::vector<JumpComponent> comps,
              EnvVariant variant = EnvVariant::K0,
              std::optional<double> psi_prime0 = std::nullopt,
              double small_jump_var = 0.0);

  double drift() const { return drift_; }
  double gaussian_sd() const { return sigma_; }
  const std::vector<JumpComponent>& components() const { return comps_; }
  EnvVariant variant() const { return variant_; }
  std::optional<double> branching_psi_prime0() const { return psi_prime0_; }
  double small_jump_var() const { return small_jump_var_; }

  // Continuous drift of sampled paths, all compensators folded in
  // (and the Doleans-Dade -sigma^2/2 - int (e^v - 1) correction for S).
  double effective_drift() const { return effective_drift_; }

  double mean_rate() const;      // E[K_1]
  double variance_rate() const;  // Var[K_1]

  // Laplace exponents of the sampled process: psi(q) = log E[e^{q K_1}],
  // psi_hat(q) = psi(-q). Throws outside the exponential-moment domain.
  double psi(double q) const;
  double psi_hat(double q) const { return psi(-q); }
  double exp_moment_bound_pos() const;
  double exp_moment_bound_neg() const;

  bool spectrally_positive() const;

  // pi((x, inf)) and pi((-inf, -x)) for x > 0.
  double upper_tail(double x) const;
  double lower_tail(double x) const;

  std::string describe() const;

 private:
  double drift_;
  double sigma_;
  std::vector<JumpComponent> comps_;
  EnvVariant variant_;
  std::optional<double> psi_prime0_;
  double small_jump_var_;
  double effective_drift_;
};

// Builds the auxiliary-process triplet from the raw environment parameters
// (alpha, sigma, pi). Variant K needs the branching psi'(0+); K0/S do not.
LevyTriplet make_environment(double alpha, double sigma,
                             std::vector<JumpComponent> pi, EnvVariant variant,
                             std::optional<double> psi_prime0 = std::nullopt,
                             double small_jump_var = 0.0);

// One realized path on a uniform grid refined by the exact jump times.
struct EnvironmentPath {
  EnvVariant variant = EnvVariant::K0;
  double horizon = 0.0;
  double drift_effective = 0.0;
  double sigma = 0.0;

  std::vector<double> times;       // strictly increasing, front()=0, back()=T
  std::vector<double> values;      // K at times, right-continuous, K(0)=0
  std::vector<double> brownian;    // raw N(0, cell) increment per cell
  std::vector<double> small_noise; // per-cell correction draws; empty if off
  std::vector<double> jump_at;     // jump size landing exactly at times[i]

  std::size_t cells() const { return times.size() - 1; }
  bool has_jump(std::size_t i) const { return jump_at[i] != 0.0; }
  // K(t_i -): the value the path approaches from the left.
  double left_value(std::size_t i) const { return values[i] - jump_at[i]; }
  double value_at(double t) const;  // piecewise-linear, cadlag at jumps
  double final_value() const { return values.back(); }
  std::size_t cell_index(double t) const;
};

struct PathOptions {
  bool gaussian_correction = false;  // small-jump variance as extra noise
};

EnvironmentPath sample_path(const LevyTriplet& triplet, double T, double dt,
                            std::uint64_t seed, const PathOptions& opts = {});

// Re-express a path as another variant (exact deterministic drift shift,
// shared randomness). psi_prime0 is required whenever K is on either side.
EnvironmentPath as_variant(const EnvironmentPath& path, EnvVariant target,
                           std::optional<double> psi_prime0 = std::nullopt);

// Keep every factor-th uniform grid point (and all jump times); Brownian
// increments are aggregated. For common-random-number refinement studies.
EnvironmentPath coarsen_path(const EnvironmentPath& path, int factor,
                             double dt_fine);

// int_0^T e^{sign * K_s} ds, trapezoid between consecutive event times.
double exp_functional(const EnvironmentPath& path, int sign);
// Running version: value at every node of the path grid.
std::vector<double> exp_functional_running(const EnvironmentPath& path,
                                           int sign);

// Largest root of psi_hat(u) = lambda (the Esscher tilt parameter).
double esscher_kappa(const LevyTriplet& triplet, double lambda);

// Triplet of K under the exponential change of measure with parameter kappa.
LevyTriplet esscher_tilt(const LevyTriplet& triplet, double kappa);

void write_path_csv(const EnvironmentPath& path, std::ostream& os);

}  // namespace cblre
