#include "cblre/sde.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cblre {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

CompetitionSpec CompetitionSpec::none() { return CompetitionSpec{}; }

CompetitionSpec CompetitionSpec::quadratic(double k) {
  if (!(k > 0)) throw std::invalid_argument("competition: quadratic k must be > 0");
  CompetitionSpec c;
  c.kind_ = Kind::Quadratic;
  c.k_ = k;
  return c;
}

CompetitionSpec CompetitionSpec::tabulated(
    std::vector<std::pair<double, double>> pts) {
  if (pts.size() < 2 || pts.front().first != 0.0 || pts.front().second != 0.0) {
    throw std::invalid_argument("competition: table must start at (0,0)");
  }
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].first > pts[i - 1].first) ||
        pts[i].second < pts[i - 1].second) {
      throw std::invalid_argument(
          "competition: table must be strictly increasing in z and "
          "non-decreasing in beta");
    }
  }
  CompetitionSpec c;
  c.kind_ = Kind::Tabulated;
  c.pts_ = std::move(pts);
  return c;
}

double CompetitionSpec::operator()(double z) const {
  switch (kind_) {
    case Kind::None:
      return 0.0;
    case Kind::Quadratic:
      return k_ * z * z;
    case Kind::Tabulated: {
      if (z <= 0) return 0.0;
      if (z >= pts_.back().first) return pts_.back().second;
      auto it = std::upper_bound(
          pts_.begin(), pts_.end(), z,
          [](double v, const auto& p) { return v < p.first; });
      const auto hi = *it;
      const auto lo = *(it - 1);
      const double t = (z - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return 0.0;
}

void CBLREConfig::validate() const {
  if (!(z0 >= 0)) throw std::invalid_argument("config: z0 must be >= 0");
  if (!(delta > 0 && delta < 1)) {
    throw std::invalid_argument("config: delta must lie in (0,1)");
  }
  if (!(z_max > z0)) throw std::invalid_argument("config: z_max must exceed z0");
  if (!(horizon > 0) || !(dt > 0) || dt > horizon) {
    throw std::invalid_argument("config: need 0 < dt <= horizon");
  }
}

const char* status_name(TrajStatus s) {
  switch (s) {
    case TrajStatus::Alive: return "alive";
    case TrajStatus::Absorbed: return "absorbed";
    case TrajStatus::ExplodedCap: return "exploded_cap";
    case TrajStatus::ExplodedQ: return "exploded_q";
  }
  return "?";
}

Trajectory simulate(const CBLREConfig& config, const EnvironmentPath& env_path,
                    std::uint64_t seed) {
  config.validate();
  if (env_path.variant == EnvVariant::K) {
    throw std::invalid_argument(
        "simulate: pass an S/K0 environment view (use as_variant)");
  }
  if (std::abs(env_path.horizon - config.horizon) >
      1e-9 * std::max(1.0, config.horizon)) {
    throw std::invalid_argument("simulate: path horizon does not match config");
  }

  const BranchingMechanism& mech = config.mech;
  const double a = mech.linear_a();
  const double g2 = mech.gamma2();
  const double imm_d = config.imm ? config.imm->d() : 0.0;
  const double imm_rate = config.imm ? config.imm->rate() : 0.0;
  const bool immigration = config.imm && !config.imm->empty();
  const double jump_tail = mech.jump_tail_mass(config.delta);
  const double q_atom = mech.killing_q();
  const double thin_rate = jump_tail + q_atom;
  const double comp_drift = mech.jump_mean_between(config.delta, 1.0);
  const double small_var =
      config.small_jump == SmallJumpMode::GaussianCorrection
          ? mech.jump_m2_below(config.delta)
          : 0.0;

  Rng rng = make_stream(seed, stream_tag::branching);

  Trajectory traj;
  traj.times = env_path.times;
  traj.values.assign(env_path.times.size(), 0.0);
  traj.values[0] = config.z0;
  double z = config.z0;

  for (std::size_t i = 0; i + 1 < env_path.times.size(); ++i) {
    const double t1 = env_path.times[i + 1];
    const double len = t1 - env_path.times[i];
    const double z_minus = z;  // left limit frozen for the jump intensities

    // (1) deterministic drift: immigration drift, linear growth, competition
    z += (imm_d + a * z - config.beta(z)) * len;
    if (z < 0) z = 0;

    // (2) Feller diffusion
    if (g2 > 0 && z > 0) {
      z += std::sqrt(2.0 * g2 * z * len) * rng.normal();
      if (z < 0) z = 0;
    }

    bool exploded_q = false;
    // (3) branching jumps of size >= delta via thinning
    if (thin_rate > 0 && z_minus > 0) {
      const long long n = rng.poisson(z_minus * thin_rate * len);
      for (long long k = 0; k < n; ++k) {
        if (q_atom > 0 && rng.uniform() * thin_rate < q_atom) {
          exploded_q = true;
          break;
        }
        z += mech.sample_jump_tail(rng, config.delta);
      }
    }

    // (4) compensator of the simulated-but-compensated jumps in [delta, 1),
    //     plus optional gaussian surrogate for the dropped z < delta ones
    if (comp_drift > 0 && z_minus > 0) {
      z -= z_minus * comp_drift * len;
      if (z < 0) z = 0;
    }
    if (small_var > 0 && z_minus > 0) {
      z += std::sqrt(z_minus * small_var * len) * rng.normal();
      if (z < 0) z = 0;
    }

    // (5) immigration jumps
    if (imm_rate > 0) {
      const long long n = rng.poisson(imm_rate * len);
      for (long long k = 0; k < n; ++k) {
        z += config.imm->law()->sample(rng);
      }
    }

    // (6) multiplicative environment, exact via the Doleans-Dade exponent
    const double cont =
        (env_path.values[i + 1] - env_path.jump_at[i + 1]) - env_path.values[i];
    if (cont != 0.0) z *= std::exp(cont);
    if (env_path.jump_at[i + 1] != 0.0) z *= std::exp(env_path.jump_at[i + 1]);

    if (exploded_q || z >= config.z_max) {
      traj.status = exploded_q ? TrajStatus::ExplodedQ : TrajStatus::ExplodedCap;
      traj.status_time = t1;
      for (std::size_t j = i + 1; j < traj.values.size(); ++j) {
        traj.values[j] = kInf;
      }
      return traj;
    }
    if (!std::isfinite(z)) {
      char buf[160];
      std::snprintf(buf, sizeof buf,
                    "simulate: non-finite state at t=%g (cell %zu, seed %llu)",
                    t1, i, static_cast<unsigned long long>(seed));
      throw std::runtime_error(buf);
    }

    traj.values[i + 1] = z;

    if (z == 0.0 && !immigration) {
      traj.status = TrajStatus::Absorbed;
      traj.status_time = t1;
      // 0 is a trap without immigration; remaining values stay 0
      return traj;
    }
  }
  return traj;
}

EnsembleResult simulate_ensemble(const CBLREConfig& config, int n_env,
                                 int n_branch, std::uint64_t master_seed,
                                 const Reducer& reducer, int threads) {
  if (n_env < 1 || n_branch < 1) {
    throw std::invalid_argument("simulate_ensemble: need n_env, n_branch >= 1");
  }
  config.validate();

  std::vector<Accumulator> per_env(static_cast<std::size_t>(n_env));
  parallel_for(
      n_env,
      [&](std::int64_t e) {
        const std::uint64_t pseed =
            stream_key(master_seed, stream_tag::env_path, static_cast<std::uint64_t>(e));
        EnvironmentPath path =
            sample_path(config.env, config.horizon, config.dt, pseed);
        Accumulator acc;
        for (int r = 0; r < n_branch; ++r) {
          const std::uint64_t rseed =
              stream_key(master_seed, stream_tag::branching,
                         static_cast<std::uint64_t>(e), static_cast<std::uint64_t>(r));
          Trajectory traj = simulate(config, path, rseed);
          acc.add(reducer(traj, path));
        }
        per_env[static_cast<std::size_t>(e)] = acc;
      },
      threads);

  EnsembleResult out;
  out.per_env.reserve(per_env.size());
  if (n_branch == 1) {
    Accumulator flat;
    for (const auto& acc : per_env) {
      flat.merge(acc);
      out.per_env.push_back({acc.mean(), 0.0, 1});
    }
    out.pooled = flat.estimate();
    out.within_var = 0.0;
    double grand = out.pooled.mean;
    double between = 0.0;
    for (const auto& acc : per_env) {
      between += (acc.mean() - grand) * (acc.mean() - grand) / per_env.size();
    }
    out.between_var = between;
    return out;
  }
  std::vector<MCEstimate> est;
  est.reserve(per_env.size());
  for (const auto& acc : per_env) est.push_back(acc.estimate());
  PooledConditional pooled = pooled_conditional(est);
  out.per_env = std::move(est);
  out.pooled = pooled.pooled;
  out.between_var = pooled.between_var;
  out.within_var = pooled.within_var;
  return out;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "time,Z,status\n";
  char buf[96];
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const char* st = "alive";
    if (traj.status != TrajStatus::Alive && traj.times[i] >= traj.status_time) {
      st = status_name(traj.status);
    }
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%s\n", traj.times[i],
                  traj.values[i], st);
    os << buf;
  }
}

}  // namespace cblre
