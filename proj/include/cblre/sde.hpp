#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "cblre/levy.hpp"
#include "cblre/mc.hpp"
#include "cblre/mechanisms.hpp"

namespace cblre {

// Competition drain beta(z): continuous, non-decreasing, beta(0) = 0.
class CompetitionSpec {
 public:
  static CompetitionSpec none();
  static CompetitionSpec quadratic(double k);
  static CompetitionSpec tabulated(std::vector<std::pair<double, double>> pts);

  double operator()(double z) const;
  bool is_none() const { return kind_ == Kind::None; }
  double quadratic_k() const { return k_; }

 private:
  enum class Kind { None, Quadratic, Tabulated };
  Kind kind_ = Kind::None;
  double k_ = 0.0;
  std::vector<std::pair<double, double>> pts_;
};

enum class SmallJumpMode { DriftOnly, GaussianCorrection };

struct CBLREConfig {
  double z0 = 1.0;
  BranchingMechanism mech = BranchingMechanism::feller(0.0, 0.0);
  std::optional<ImmigrationMechanism> imm;
  CompetitionSpec beta = CompetitionSpec::none();
  LevyTriplet env{0.0, 0.0, {}, EnvVariant::S};
  double horizon = 1.0;
  double dt = 1e-3;
  double delta = 0.05;   // branching-jump thinning cut, in (0,1)
  double z_max = 1e12;   // explosion cap
  SmallJumpMode small_jump = SmallJumpMode::DriftOnly;

  void validate() const;
};

enum class TrajStatus { Alive, Absorbed, ExplodedCap, ExplodedQ };

struct Trajectory {
  std::vector<double> times;
  std::vector<double> values;  // +inf after explosion
  TrajStatus status = TrajStatus::Alive;
  double status_time = 0.0;
  double final_value() const { return values.back(); }
};

const char* status_name(TrajStatus s);

// Operator-split Euler step on the shared environment path:
// drift -> Feller diffusion -> branching jumps (>= delta, thinning at the
// cell-start left limit) -> small-jump compensation -> immigration ->
// exact multiplicative environment. The path must be an S/K0 view sampled
// with the config's horizon and dt.
Trajectory simulate(const CBLREConfig& config, const EnvironmentPath& env_path,
                    std::uint64_t seed);

using Reducer = std::function<double(const Trajectory&, const EnvironmentPath&)>;

struct EnsembleResult {
  std::vector<MCEstimate> per_env;
  MCEstimate pooled;
  double between_var = 0.0;
  double within_var = 0.0;
};

// n_env environment paths x n_branch conditionally independent branching
// replicates per path. Reproducible under any thread schedule.
EnsembleResult simulate_ensemble(const CBLREConfig& config, int n_env,
                                 int n_branch, std::uint64_t master_seed,
                                 const Reducer& reducer, int threads = 0);

void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

}  // namespace cblre
