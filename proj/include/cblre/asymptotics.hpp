#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cblre/levy.hpp"
#include "cblre/mechanisms.hpp"
#include "cblre/sde.hpp"

namespace cblre {

enum class Regime { ExtinctionAS, LiminfZero, SurvivalPossible, Indeterminate };

struct RegimeReport {
  double k_drift = 0.0;  // E[K_1]
  Regime regime = Regime::Indeterminate;
  IntcondResult intcond;
  bool xlogx = false;
  std::string to_text() const;
};

// Prop-3.3 style classification by the drift sign of K, with the numeric
// integral condition gating the supercritical survival claim.
RegimeReport classify(const BranchingMechanism& mech, const LevyTriplet& env);

struct CltNormalizers {
  double a_t = 0.0;
  double b_t = 0.0;  // sqrt of b^2(t)
  bool finite_second_moment = true;
};

// a(t) = (m + int_{|x|>=1} x pi) t and b^2(t) = (sigma^2 + int x^2 pi) t.
CltNormalizers clt_normalizers(const LevyTriplet& env, double t);

// Diagnostic ratio U(x) / (x^2 T(x)) for the general normalization criterion.
double doney_maller_ratio(const LevyTriplet& env, double x);

struct CltReport {
  double ks_stat = 0.0;
  double p_value = 0.0;
  int survivors = 0;
  int n_paths = 0;
  bool conclusive = false;
  double a_t = 0.0;  // normalizers actually used (K-variant mean growth)
  double b_t = 0.0;
  std::vector<double> standardized;  // (log Z_t - a(t)) / b(t) on survivors
  // survivor counts at alternative thresholds, for the {W>0} proxy
  // sensitivity report
  std::vector<std::pair<double, int>> threshold_sensitivity;
};

// Simulates n_paths CBLRE trajectories (each with its own environment),
// conditions on Z_t > threshold and KS-tests the standardized log sizes
// against the standard normal.
CltReport clt_check(const CBLREConfig& config, double t, int n_paths,
                    std::uint64_t seed, double threshold = 1e-6,
                    int threads = 0);

}  // namespace cblre
