#include "cblre/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "cblre/asymptotics.hpp"
#include "cblre/backward.hpp"
#include "cblre/logistic.hpp"
#include "cblre/mc.hpp"
#include "cblre/numerics.hpp"
#include "cblre/sde.hpp"

namespace cblre {

namespace {

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::string path = dir + "/" + name;
  std::ofstream os(path, std::ios::binary);  // LF line endings everywhere
  if (!os) throw NumericalError("cannot open output file: " + path);
  return os;
}

void writef(std::ofstream& os, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  os << buf;
}

void write_manifest(const Config& cfg, const std::string& dir,
                    const std::string& experiment, std::uint64_t seed) {
  auto os = open_out(dir, "manifest.txt");
  writef(os, "tool=%s\n", kToolVersion);
  writef(os, "experiment=%s\n", experiment.c_str());
  writef(os, "config_hash=%016llx\n",
         static_cast<unsigned long long>(cfg.hash()));
  writef(os, "seed=%llu\n", static_cast<unsigned long long>(seed));
}

// First-passage runs and several harnesses work at the level of the
// auxiliary process itself, so their configs give K directly.
LevyTriplet build_k_triplet_raw(const Config& cfg) {
  const double alpha = cfg.get_double("env.alpha", 0.0);
  const double sigma = cfg.get_double("env.sigma", 0.0);
  auto comps = build_jump_components(cfg, "env.jumps");
  try {
    return LevyTriplet(alpha, sigma, std::move(comps), EnvVariant::K);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("env: ") + e.what());
  }
}

EnvVariant parse_variant(const std::string& s) {
  if (s == "S") return EnvVariant::S;
  if (s == "K") return EnvVariant::K;
  if (s == "K0") return EnvVariant::K0;
  throw ConfigError("env.variant must be S, K or K0");
}

struct SimKnobs {
  double z0, t, dt, delta, zmax;
  SmallJumpMode small;
};

SimKnobs read_sim_knobs(const Config& cfg) {
  SimKnobs k{};
  k.z0 = cfg.get_double("sim.z0", 1.0);
  k.t = cfg.get_double("sim.t");
  k.dt = cfg.get_double("sim.dt", 1e-3);
  k.delta = cfg.get_double("sim.delta", 0.05);
  k.zmax = cfg.get_double("sim.zmax", 1e12);
  const std::string sj = cfg.get_string("sim.smalljump", "drift");
  if (sj == "drift") {
    k.small = SmallJumpMode::DriftOnly;
  } else if (sj == "gauss") {
    k.small = SmallJumpMode::GaussianCorrection;
  } else {
    throw ConfigError("sim.smalljump must be drift or gauss");
  }
  return k;
}

CompetitionSpec read_competition(const Config& cfg) {
  const std::string c = cfg.get_string("competition", "none");
  if (c == "none") return CompetitionSpec::none();
  try {
    if (c == "quadratic") {
      const double k = cfg.get_double("competition.k");
      if (!(k > 0)) throw ConfigError("competition.k must be > 0");
      return CompetitionSpec::quadratic(k);
    }
    if (c == "tabulated") {
      // competition.points = z0:b0,z1:b1,...
      const std::string pts = cfg.get_string("competition.points");
      std::vector<std::pair<double, double>> table;
      std::istringstream in(pts);
      std::string tok;
      while (std::getline(in, tok, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) {
          throw ConfigError("competition.points: expected z:beta pairs");
        }
        table.emplace_back(std::stod(tok.substr(0, colon)),
                           std::stod(tok.substr(colon + 1)));
      }
      return CompetitionSpec::tabulated(std::move(table));
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("competition: ") + e.what());
  }
  throw ConfigError("competition must be none, quadratic or tabulated");
}

void validated(const CBLREConfig& c) {
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

// ---------------------------------------------------------------- sample-env
void run_sample_env(const Config& cfg, const std::string& dir,
                    std::uint64_t seed, int threads) {
  const EnvVariant variant = parse_variant(cfg.get_string("env.variant", "K0"));
  std::optional<double> p0;
  if (cfg.has("env.psi_prime0")) p0 = cfg.get_double("env.psi_prime0");
  const LevyTriplet trip = build_environment(cfg, variant, p0);
  const double t = cfg.get_double("sim.t");
  const double dt = cfg.get_double("sim.dt");
  const int n = static_cast<int>(cfg.get_int("mc.n_paths", 1));
  if (n < 1 || n > 100000) throw ConfigError("mc.n_paths must be in [1, 1e5]");
  PathOptions popt;
  popt.gaussian_correction = cfg.get_int("env.gauss_correction", 0) != 0;
  cfg.reject_unknown();

  std::vector<double> finals(n);
  parallel_for(
      n,
      [&](std::int64_t i) {
        const auto path = sample_path(
            trip, t, dt, stream_key(seed, stream_tag::generic_mc, i), popt);
        finals[i] = path.final_value();
        if (i < 20) {
          auto os = open_out(dir, "path_" + std::to_string(i) + ".csv");
          write_path_csv(path, os);
        }
      },
      threads);

  auto os = open_out(dir, "summary.txt");
  writef(os, "triplet=%s\n", trip.describe().c_str());
  writef(os, "effective_drift=%.17g\n", trip.effective_drift());
  writef(os, "mean_rate=%.17g\n", trip.mean_rate());
  writef(os, "variance_rate=%.17g\n", trip.variance_rate());
  if (n >= 2) {
    const auto est = stream_accumulate(finals);
    writef(os, "K_T_mean=%.17g\nK_T_se=%.17g\nn=%d\n", est.mean, est.se, n);
  }
}

// ------------------------------------------------------------------ simulate
void run_simulate(const Config& cfg, const std::string& dir,
                  std::uint64_t seed, int threads) {
  CBLREConfig sim;
  sim.mech = build_mechanism(cfg);
  sim.imm = build_immigration(cfg);
  sim.beta = read_competition(cfg);
  sim.env = build_environment(cfg, EnvVariant::S);
  const SimKnobs k = read_sim_knobs(cfg);
  sim.z0 = k.z0;
  sim.horizon = k.t;
  sim.dt = k.dt;
  sim.delta = k.delta;
  sim.z_max = k.zmax;
  sim.small_jump = k.small;
  validated(sim);
  const int n = static_cast<int>(cfg.get_int("mc.n_paths", 1));
  if (n < 1 || n > 1000000) throw ConfigError("mc.n_paths must be in [1, 1e6]");
  cfg.reject_unknown();

  std::vector<double> finals(n);
  std::vector<int> statuses(n);
  parallel_for(
      n,
      [&](std::int64_t i) {
        const auto path = sample_path(sim.env, sim.horizon, sim.dt,
                                      stream_key(seed, stream_tag::env_path, i));
        const auto traj =
            simulate(sim, path, stream_key(seed, stream_tag::branching, i));
        finals[i] = traj.final_value();
        statuses[i] = static_cast<int>(traj.status);
        if (i < 20) {
          auto os = open_out(dir, "traj_" + std::to_string(i) + ".csv");
          write_trajectory_csv(traj, os);
        }
      },
      threads);

  int alive = 0, absorbed = 0, cap = 0, qex = 0;
  Accumulator acc;
  for (int i = 0; i < n; ++i) {
    switch (static_cast<TrajStatus>(statuses[i])) {
      case TrajStatus::Alive:
        ++alive;
        acc.add(finals[i]);
        break;
      case TrajStatus::Absorbed: ++absorbed; break;
      case TrajStatus::ExplodedCap: ++cap; break;
      case TrajStatus::ExplodedQ: ++qex; break;
    }
  }
  auto os = open_out(dir, "summary.txt");
  writef(os, "n=%d\nalive=%d\nabsorbed=%d\nexploded_cap=%d\nexploded_q=%d\n", n,
         alive, absorbed, cap, qex);
  if (acc.count() >= 2) {
    const auto est = acc.estimate();
    writef(os, "final_mean_alive=%.17g\nfinal_se_alive=%.17g\n", est.mean,
           est.se);
  }
}

// -------------------------------------------------------------- verify-laplace
struct LaplaceRow {
  double mc, closed, se;
};

void run_verify_laplace(const Config& cfg, const std::string& dir,
                        std::uint64_t seed, int threads) {
  CBLREConfig sim;
  sim.mech = build_mechanism(cfg);
  if (!sim.mech.hypothesis_H()) {
    throw ConfigError("mech: hypothesis (H) must hold for verify-laplace");
  }
  sim.imm = build_immigration(cfg);
  sim.env = build_environment(cfg, EnvVariant::S);
  const SimKnobs k = read_sim_knobs(cfg);
  sim.z0 = k.z0;
  sim.horizon = k.t;
  sim.dt = k.dt;
  sim.delta = k.delta;
  sim.z_max = k.zmax;
  sim.small_jump = k.small;
  validated(sim);
  const double lambda = cfg.get_double("lap.lambda");
  const int n_env = static_cast<int>(cfg.get_int("mc.n_env"));
  const int n_branch = static_cast<int>(cfg.get_int("mc.n_branch"));
  if (n_env < 2 || n_branch < 2) {
    throw ConfigError("mc.n_env and mc.n_branch must both be >= 2");
  }
  cfg.reject_unknown();

  const double psi0p = sim.mech.psi_prime0();
  std::vector<LaplaceRow> rows(n_env);
  parallel_for(
      n_env,
      [&](std::int64_t e) {
        const auto path_s = sample_path(
            sim.env, sim.horizon, sim.dt, stream_key(seed, stream_tag::env_path, e));
        const auto path_k = as_variant(path_s, EnvVariant::K, psi0p);
        const double closed = conditional_laplace(path_k, sim.z0, lambda,
                                                  sim.horizon, sim.mech, sim.imm);
        const double k_t = path_k.final_value();
        Accumulator acc;
        for (int r = 0; r < n_branch; ++r) {
          const auto traj = simulate(
              sim, path_s, stream_key(seed, stream_tag::branching, e, r));
          const double z = traj.final_value();
          acc.add(std::isfinite(z) ? std::exp(-lambda * z * std::exp(-k_t))
                                   : 0.0);
        }
        const auto est = acc.estimate();
        rows[e] = {est.mean, closed, est.se};
      },
      threads);

  auto csv = open_out(dir, "identity.csv");
  csv << "env_id,mc,closed_form,se\n";
  int within = 0;
  double abs_rel = 0.0;
  for (int e = 0; e < n_env; ++e) {
    writef(csv, "%d,%.17g,%.17g,%.17g\n", e, rows[e].mc, rows[e].closed,
           rows[e].se);
    if (std::abs(rows[e].mc - rows[e].closed) <= 3.0 * rows[e].se) ++within;
    abs_rel += std::abs(rows[e].mc - rows[e].closed) / rows[e].closed;
  }
  const double frac = double(within) / n_env;
  const double mad = abs_rel / n_env;
  auto os = open_out(dir, "summary.txt");
  writef(os, "n_env=%d\nn_branch=%d\nfrac_within_3se=%.17g\n", n_env, n_branch,
         frac);
  writef(os, "mean_abs_rel_dev=%.17g\n", mad);
  writef(os, "pass_frac=%d\npass_mad=%d\n", frac >= 0.95 ? 1 : 0,
         mad <= 0.02 ? 1 : 0);
}

// --------------------------------------------------------------------- neveu
void run_neveu(const Config& cfg, const std::string& dir, std::uint64_t seed,
               int threads) {
  const LevyTriplet env = build_environment(cfg, EnvVariant::K0);
  const double z = cfg.get_double("neveu.z", 1.0);
  const double t = cfg.get_double("sim.t", 1.0);
  const double dt = cfg.get_double("sim.dt", 1e-3);
  const auto lambdas = cfg.has("neveu.lambdas")
                           ? cfg.get_double_list("neveu.lambdas")
                           : std::vector<double>{0.5, 1.0, 4.0};
  const int n_paths = static_cast<int>(cfg.get_int("mc.n_paths", 10));
  const int n_ext = static_cast<int>(cfg.get_int("mc.n_ext", 20000));
  const double t_trunc = cfg.get_double("mc.t_trunc", 30.0);
  cfg.reject_unknown();

  const auto mech = BranchingMechanism::neveu();
  auto csv = open_out(dir, "neveu_check.csv");
  csv << "path_id,lambda,sup_diff,v0_ode,v0_closed\n";
  double worst = 0.0;
  for (int p = 0; p < n_paths; ++p) {
    const auto path =
        sample_path(env, t, dt, stream_key(seed, stream_tag::env_path, p));
    for (double lam : lambdas) {
      const auto sol = solve_v_full(path, t, lam, mech);
      double sup = 0.0;
      for (std::size_t i = 0; i < sol.s.size(); i += 7) {
        sup = std::max(sup,
                       std::abs(sol.v[i] - neveu_v(path, t, lam, sol.s[i])));
      }
      worst = std::max(worst, sup);
      writef(csv, "%d,%.17g,%.17g,%.17g,%.17g\n", p, lam, sup, sol.v0(),
             neveu_v(path, t, lam, 0.0));
    }
  }
  const auto ext = neveu_extinction(z, env, t_trunc, dt, n_ext, seed, threads);
  auto os = open_out(dir, "summary.txt");
  writef(os, "sup_diff_max=%.17g\npass_closed_form=%d\n", worst,
         worst <= 1e-6 ? 1 : 0);
  writef(os, "extinction_mean=%.17g\nextinction_se=%.17g\n", ext.estimate.mean,
         ext.estimate.se);
  writef(os, "truncation_bound=%.17g\n", ext.truncation_bound);
}

// -------------------------------------------------------------------- stable
void run_stable(const Config& cfg, const std::string& dir, std::uint64_t seed,
                int threads) {
  const double alpha = cfg.get_double("stable.alpha");
  const double c = cfg.get_double("stable.c");
  CBLREConfig sim;
  try {
    sim.mech = BranchingMechanism::stable(alpha, c);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stable: ") + e.what());
  }
  sim.env = build_environment(cfg, EnvVariant::S);
  const SimKnobs k = read_sim_knobs(cfg);
  sim.z0 = k.z0;
  sim.horizon = k.t;
  sim.dt = k.dt;
  sim.delta = k.delta;
  sim.z_max = k.zmax;
  sim.small_jump = k.small;
  validated(sim);
  const auto lambdas = cfg.has("stable.lambdas")
                           ? cfg.get_double_list("stable.lambdas")
                           : std::vector<double>{0.5, 1.0, 4.0};
  const int n_vpaths = static_cast<int>(cfg.get_int("mc.n_paths", 10));
  const int n_env = static_cast<int>(cfg.get_int("mc.n_env", 0));
  const int n_branch = static_cast<int>(cfg.get_int("mc.n_branch", 0));
  cfg.reject_unknown();

  // closed form against the generic backward solver
  auto csv = open_out(dir, "stable_v_check.csv");
  csv << "path_id,lambda,sup_diff\n";
  double worst = 0.0;
  for (int p = 0; p < n_vpaths; ++p) {
    const auto path = sample_path(sim.env, sim.horizon, sim.dt,
                                  stream_key(seed, stream_tag::env_path, p));
    for (double lam : lambdas) {
      const auto sol = solve_v_full(path, sim.horizon, lam, sim.mech);
      double sup = 0.0;
      for (std::size_t i = 0; i < sol.s.size(); i += 7) {
        sup = std::max(sup, std::abs(sol.v[i] - stable_v(path, sim.horizon,
                                                         sol.s[i], lam, alpha, c)));
      }
      worst = std::max(worst, sup);
      writef(csv, "%d,%.17g,%.17g\n", p, lam, sup);
    }
  }

  auto os = open_out(dir, "summary.txt");
  writef(os, "sup_diff_max=%.17g\npass_closed_form=%d\n", worst,
         worst <= 1e-6 ? 1 : 0);

  // conditional survival probability vs the Monte Carlo estimate: each
  // replicate contributes the exact conditional survival from its simulated
  // state at t0 = t/2 (tower property), which stays unbiased under the
  // truncated jump measure where a terminal threshold count cannot resolve
  // freshly extinct paths
  if (n_env >= 2 && n_branch >= 2 && alpha > 1) {
    std::vector<double> closed(n_env), mc_mean(n_env), mc_se(n_env);
    parallel_for(
        n_env,
        [&](std::int64_t e) {
          const auto path = sample_path(sim.env, sim.horizon, sim.dt,
                                        stream_key(seed, stream_tag::env_path,
                                                   1000003ULL + e));
          closed[e] = stable_probs(sim.z0, path, sim.horizon, alpha, c).survival;
          const double t0 = 0.5 * sim.horizon;
          Accumulator acc;
          for (int r = 0; r < n_branch; ++r) {
            const auto traj = simulate(
                sim, path, stream_key(seed, stream_tag::branching, e, r));
            const std::size_t i0 = path.cell_index(t0);
            acc.add(stable_survival_from(traj.values[i0], path, path.times[i0],
                                         sim.horizon, alpha, c));
          }
          const auto est = acc.estimate();
          mc_mean[e] = est.mean;
          mc_se[e] = est.se;
        },
        threads);
    auto sc = open_out(dir, "stable_survival.csv");
    sc << "env_id,closed,mc,se\n";
    double d = 0.0, var = 0.0;
    for (int e = 0; e < n_env; ++e) {
      writef(sc, "%d,%.17g,%.17g,%.17g\n", e, closed[e], mc_mean[e], mc_se[e]);
      d += (mc_mean[e] - closed[e]) / n_env;
      var += mc_se[e] * mc_se[e] / double(n_env) / double(n_env);
    }
    const double pooled_se = std::sqrt(var);
    writef(os, "survival_pooled_diff=%.17g\nsurvival_pooled_se=%.17g\n", d,
           pooled_se);
    writef(os, "pass_survival=%d\n", std::abs(d) <= 3 * pooled_se ? 1 : 0);
  }
}

// ------------------------------------------------------------------ logistic
void run_logistic(const Config& cfg, const std::string& dir,
                  std::uint64_t seed, int threads) {
  const double a = cfg.get_double("logistic.a");
  const double kk = cfg.get_double("logistic.k");
  if (!(kk > 0)) throw ConfigError("logistic.k must be > 0");
  const double z0 = cfg.get_double("sim.z0", 1.0);
  if (!(z0 > 0)) throw ConfigError("sim.z0 must be > 0 for logistic runs");
  const double t = cfg.get_double("sim.t");
  const double dt = cfg.get_double("sim.dt", 1e-2);
  const int n_paths = static_cast<int>(cfg.get_int("mc.n_paths", 200));
  const int n_max = static_cast<int>(cfg.get_int("moments.n_max", 2));
  const LevyTriplet env_k = build_environment(cfg, EnvVariant::K, -a);
  cfg.reject_unknown();
  if (n_paths < 2) throw ConfigError("mc.n_paths must be >= 2");

  std::vector<double> avg(n_paths);
  std::vector<std::vector<double>> zt_pow(
      static_cast<std::size_t>(n_max), std::vector<double>(n_paths));
  parallel_for(
      n_paths,
      [&](std::int64_t p) {
        const auto path = sample_path(env_k, t, dt,
                                      stream_key(seed, stream_tag::env_path, p));
        avg[p] = logistic_time_average(path, z0, kk);
        const auto traj = logistic_exact_solution(path, z0, kk);
        double zp = 1.0;
        for (int n = 1; n <= n_max; ++n) {
          zp *= traj.final_value();
          zt_pow[n - 1][p] = zp;
        }
        if (p == 0) {
          auto os = open_out(dir, "logistic_traj.csv");
          write_trajectory_csv(traj, os);
        }
      },
      threads);

  auto mos = open_out(dir, "moments.csv");
  mos << "n,formula,mc,rel_err\n";
  for (int n = 1; n <= n_max; ++n) {
    const double formula = logistic_stationary_moment(env_k, kk, n);
    const auto est = stream_accumulate(zt_pow[n - 1]);
    writef(mos, "%d,%.17g,%.17g,%.17g\n", n, formula, est.mean,
           std::abs(est.mean - formula) / formula);
  }
  const auto avg_est = stream_accumulate(avg);
  auto os = open_out(dir, "summary.txt");
  writef(os, "time_avg_mc=%.17g\ntime_avg_se=%.17g\n", avg_est.mean, avg_est.se);
  writef(os, "time_avg_limit=%.17g\n", env_k.mean_rate() / kk);
}

// ------------------------------------------------------------------- passage
void run_passage(const Config& cfg, const std::string& dir, std::uint64_t seed,
                 int threads) {
  const LevyTriplet env_k = build_k_triplet_raw(cfg);
  const double z = cfg.get_double("passage.z");
  const double b = cfg.get_double("passage.b");
  const double lambda = cfg.get_double("passage.lambda");
  const double kk = cfg.get_double("passage.k", 1.0);
  PassageMCConfig mc;
  mc.n_formula = static_cast<int>(cfg.get_int("mc.n_formula", 10000));
  mc.n_direct = static_cast<int>(cfg.get_int("mc.n_direct", 10000));
  mc.dt = cfg.get_double("sim.dt", 1e-3);
  mc.t_chunk = cfg.get_double("mc.t_chunk", 10.0);
  mc.t_max = cfg.get_double("mc.t_max", 2000.0);
  mc.seed = seed;
  mc.threads = threads;
  cfg.reject_unknown();

  PassageResult res;
  try {
    res = first_passage_laplace(z, b, lambda, env_k, kk, mc);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("passage: ") + e.what());
  }
  auto csv = open_out(dir, "passage.csv");
  csv << "lambda,formula,direct,se_formula,se_direct\n";
  writef(csv, "%.17g,%.17g,%.17g,%.17g,%.17g\n", lambda, res.formula.mean,
         res.direct.mean, res.formula.se, res.direct.se);
  auto os = open_out(dir, "summary.txt");
  const double pooled = std::hypot(res.formula.se, res.direct.se);
  writef(os, "kappa=%.17g\ntail_bound=%.17g\ndirect_giveups=%d\n", res.kappa,
         res.tail_bound, res.direct_giveups);
  const bool agree =
      std::abs(res.formula.mean - res.direct.mean) <= 3 * pooled + 1e-9;
  writef(os, "diff=%.17g\npooled_se=%.17g\npass=%d\n",
         res.formula.mean - res.direct.mean, pooled, agree ? 1 : 0);
}

// ----------------------------------------------------------------------- clt
void run_clt(const Config& cfg, const std::string& dir, std::uint64_t seed,
             int threads) {
  CBLREConfig sim;
  sim.mech = build_mechanism(cfg);
  sim.env = build_environment(cfg, EnvVariant::S);
  const double t = cfg.get_double("clt.t");
  sim.z0 = cfg.get_double("sim.z0", 1.0);
  sim.horizon = t;
  sim.dt = cfg.get_double("sim.dt", 1e-2);
  sim.delta = cfg.get_double("sim.delta", 0.05);
  sim.z_max = cfg.get_double("sim.zmax", 1e80);  // log sizes grow linearly in t
  validated(sim);
  const int n_paths = static_cast<int>(cfg.get_int("mc.n_paths", 2000));
  const double threshold = cfg.get_double("clt.threshold", 1e-6);
  cfg.reject_unknown();

  CltReport rep;
  try {
    rep = clt_check(sim, t, n_paths, seed, threshold, threads);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("clt: ") + e.what());
  }
  auto csv = open_out(dir, "clt_samples.csv");
  csv << "standardized\n";
  for (double s : rep.standardized) writef(csv, "%.17g\n", s);
  auto os = open_out(dir, "summary.txt");
  writef(os, "n_paths=%d\nsurvivors=%d\nconclusive=%d\n", rep.n_paths,
         rep.survivors, rep.conclusive ? 1 : 0);
  writef(os, "ks_stat=%.17g\np_value=%.17g\n", rep.ks_stat, rep.p_value);
  writef(os, "a_t=%.17g\nb_t=%.17g\n", rep.a_t, rep.b_t);
  for (const auto& [th, cnt] : rep.threshold_sensitivity) {
    writef(os, "survivors_at_%g=%d\n", th, cnt);
  }
  for (double x : {10.0, 100.0, 1000.0}) {
    writef(os, "dm_ratio_%g=%.17g\n", x, doney_maller_ratio(sim.env, x));
  }
}

// ------------------------------------------------------------------ classify
void run_classify(const Config& cfg, const std::string& dir, std::uint64_t seed,
                  int threads) {
  (void)seed;
  (void)threads;
  const auto mech = build_mechanism(cfg);
  if (!mech.hypothesis_H()) {
    throw ConfigError("mech: classification requires hypothesis (H)");
  }
  const LevyTriplet env =
      build_environment(cfg, EnvVariant::K, mech.psi_prime0());
  cfg.reject_unknown();
  const auto regime = classify(mech, env);
  const auto rep = check_hypotheses(mech, env);
  auto os = open_out(dir, "report.txt");
  os << regime.to_text();
  os << rep.to_text();
}

}  // namespace

void run_experiment(const Config& cfg, const std::string& out_dir,
                    int threads) {
  const std::string kind = cfg.get_string("experiment");
  const std::uint64_t seed = cfg.get_seed("seed", 1);
  write_manifest(cfg, out_dir, kind, seed);
  if (kind == "sample-env") {
    run_sample_env(cfg, out_dir, seed, threads);
  } else if (kind == "simulate") {
    run_simulate(cfg, out_dir, seed, threads);
  } else if (kind == "verify-laplace") {
    run_verify_laplace(cfg, out_dir, seed, threads);
  } else if (kind == "neveu") {
    run_neveu(cfg, out_dir, seed, threads);
  } else if (kind == "stable") {
    run_stable(cfg, out_dir, seed, threads);
  } else if (kind == "logistic") {
    run_logistic(cfg, out_dir, seed, threads);
  } else if (kind == "passage") {
    run_passage(cfg, out_dir, seed, threads);
  } else if (kind == "clt") {
    run_clt(cfg, out_dir, seed, threads);
  } else if (kind == "classify") {
    run_classify(cfg, out_dir, seed, threads);
  } else {
    throw ConfigError("experiment must be one of sample-env, simulate, "
                      "verify-laplace, neveu, stable, logistic, passage, clt, "
                      "classify");
  }
}

}  // namespace cblre
