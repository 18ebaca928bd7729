#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "cblre/rng.hpp"

namespace cblre {

class JumpLaw;

// Result of an Esscher tilt of a single law: the renormalized law and the
// factor E[e^{-kappa Z}] the component rate picks up.
struct TiltedLaw;

// A sampleable jump-size law with the analytic moments the exponent and
// tilt computations need. Families cover every configuration the toolkit
// accepts; `from_density` tabulates anything else on a bounded interval.
class JumpLaw {
 public:
  static JumpLaw dirac(double c);
  static JumpLaw normal(double mean, double sd);
  static JumpLaw exponential(double mean);  // support (0, inf)
  static JumpLaw uniform(double a, double b);
  static JumpLaw two_point(double z1, double p1, double z2);

  // Tabulates `density` (not necessarily normalized) on [lo, hi].
  // Returns the normalized law; *total_mass receives the integral, which is
  // the Poisson rate when the density is a truncated Levy measure.
  static JumpLaw from_density(const std::function<double(double)>& density,
                              double lo, double hi, double* total_mass,
                              int cells = 4096);

  double mean() const;
  double second_moment() const;
  double mgf(double theta) const;  // E[e^{theta Z}]; +inf outside the domain
  double mgf_prime(double theta) const;  // E[Z e^{theta Z}]
  double mgf_domain_hi() const;    // sup theta with finite mgf
  double mgf_domain_lo() const;
  double cdf(double x) const;
  double tail(double x) const { return 1.0 - cdf(x); }

  double min_support() const;
  double max_support() const;

  // E[Z 1_{lo < Z < hi}] (open window; atoms on the boundary excluded).
  double mean_inside(double lo, double hi) const;
  // E[Z^2 1_{Z < c}].
  double m2_below(double c) const;
  // E[(e^Z - 1 - Z) 1_{lo < Z < hi}].
  double dd_inside(double lo, double hi) const;
  // E[e^{-l Z} - 1 + l Z] and E[Z (1 - e^{-l Z})], cancellation-free.
  double psi0_term(double l) const;
  double psi0_term_prime(double l) const;
  // E[(e^Z - 1) 1_{lo < Z < hi}].
  double exp_minus_one_inside(double lo, double hi) const;

  double sample(Rng& rng) const;
  // Sample conditional on Z >= lo (requires tail(lo) > 0).
  double sample_tail(Rng& rng, double lo) const;

  // Esscher tilt: density multiplied by e^{-kappa z} and renormalized.
  TiltedLaw tilt(double kappa) const;

  std::string describe() const;

 private:
  enum class Kind { Dirac, Normal, Exponential, Uniform, TwoPoint, Grid };

  struct GridData {
    std::vector<double> x;        // nodes, uniform
    std::vector<double> pdf;      // normalized density at nodes
    std::vector<double> cum;      // cumulative probability at nodes
    double mean = 0.0, m2 = 0.0;
  };

  JumpLaw(Kind k, double p1, double p2, double p3)
      : kind_(k), a_(p1), b_(p2), c_(p3) {}

  double grid_integral(const std::function<double(double)>& w, double lo,
                       double hi) const;

  Kind kind_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  std::shared_ptr<const GridData> grid_;
};

struct TiltedLaw {
  JumpLaw law;
  double factor;
};

}  // namespace cblre
