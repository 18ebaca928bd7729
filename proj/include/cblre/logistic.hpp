#pragma once

#include <cstdint>

#include "cblre/levy.hpp"
#include "cblre/mc.hpp"
#include "cblre/sde.hpp"

namespace cblre {

// Z_t = z0 e^{K_t} / (1 + k z0 int_0^t e^{K_s} ds) on the path grid.
// The running integral uses the trapezoid rule of exp_functional.
Trajectory logistic_exact_solution(const EnvironmentPath& k_path, double z0,
                                   double k);

// k^{-n} psi_K'(0+) psi_K(1) ... psi_K(n-1) / (n-1)!; requires K drifting to
// +infinity with all positive exponential moments.
double logistic_stationary_moment(const LevyTriplet& env_k, double k, int n);

// (1/(k t)) log(1 + k z0 int_0^t e^{K_s} ds)  ==  (1/t) int_0^t Z_s ds.
double logistic_time_average(const EnvironmentPath& k_path, double z0,
                             double k);

struct PassageMCConfig {
  int n_formula = 10000;
  int n_direct = 10000;
  double dt = 1e-3;
  double t_chunk = 10.0;
  double t_max = 2000.0;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct PassageResult {
  MCEstimate formula;  // Esscher moment-ratio estimate of E[e^{-lambda sigma_b}]
  MCEstimate direct;   // direct MC of e^{-lambda sigma_b} from exact paths
  double kappa = 0.0;
  double tail_bound = 0.0;  // mean geometric tail bound of the I_inf truncation
  int direct_giveups = 0;   // paths not crossing b before t_max
};

// Laplace transform of sigma_b = inf{s : Z_s <= b} two ways: the tilted
// moment ratio E^k[(1+kzI)^k]/E^k[(z/b+kzI)^k] with I sampled under the
// Esscher tilt, and direct simulation with in-cell bisection so passage
// times carry no grid bias. Requires spectrally positive K drifting to
// -infinity and kappa(lambda) > 1.
PassageResult first_passage_laplace(double z, double b, double lambda,
                                    const LevyTriplet& env_k, double k,
                                    const PassageMCConfig& mc = {});

}  // namespace cblre
