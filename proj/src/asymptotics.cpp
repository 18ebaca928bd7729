#include "cblre/asymptotics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cblre/numerics.hpp"

namespace cblre {

RegimeReport classify(const BranchingMechanism& mech, const LevyTriplet& env) {
  if (!mech.hypothesis_H()) {
    throw std::invalid_argument("classify: hypothesis (H) fails");
  }
  RegimeReport r;
  r.k_drift = env.mean_rate();
  r.xlogx = mech.xlogx();
  const double tol = 1e-12 * std::max(1.0, std::abs(env.drift()));
  if (r.k_drift < -tol) {
    r.regime = Regime::ExtinctionAS;
  } else if (r.k_drift <= tol) {
    r.regime = Regime::LiminfZero;
  } else {
    r.intcond = integrate_intcond(mech, env);
    r.regime =
        r.intcond.converged ? Regime::SurvivalPossible : Regime::Indeterminate;
  }
  return r;
}

std::string RegimeReport::to_text() const {
  const char* name = regime == Regime::ExtinctionAS      ? "extinction_as"
                     : regime == Regime::LiminfZero      ? "liminf_zero"
                     : regime == Regime::SurvivalPossible ? "survival_possible"
                                                          : "indeterminate";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "k_drift=%.12g\nregime=%s\nintcond_value=%.12g\n"
                "intcond_converged=%d\nxlogx=%d\n",
                k_drift, name, intcond.value, intcond.converged ? 1 : 0,
                xlogx ? 1 : 0);
  return buf;
}

CltNormalizers clt_normalizers(const LevyTriplet& env, double t) {
  CltNormalizers n;
  for (const auto& c : env.components()) {
    if (!std::isfinite(c.law.second_moment())) n.finite_second_moment = false;
  }
  if (!n.finite_second_moment) return n;  // flagged; values stay zero
  n.a_t = env.mean_rate() * t;
  n.b_t = std::sqrt(env.variance_rate() * t);
  return n;
}

double doney_maller_ratio(const LevyTriplet& env, double x) {
  TailFunctions tf = A_T_U(env);
  const double T = tf.T(x);
  if (T <= 0) return std::numeric_limits<double>::infinity();
  return tf.U(x) / (x * x * T);
}

CltReport clt_check(const CBLREConfig& config, double t, int n_paths,
                    std::uint64_t seed, double threshold, int threads) {
  if (n_paths < 2) throw std::invalid_argument("clt_check: n_paths >= 2");
  CltNormalizers norm = clt_normalizers(config.env, t);
  if (!norm.finite_second_moment) {
    throw std::invalid_argument(
        "clt_check: infinite second moment; Doney-Maller general normalizers "
        "not implemented");
  }
  if (!(norm.b_t > 0)) {
    throw std::invalid_argument(
        "clt_check: degenerate environment (b(t) = 0); nothing to standardize");
  }
  // the growth rate of log Z is that of the auxiliary K, which carries the
  // -psi'(0+) correction on top of the S/K0 path drift
  const double psi0p = config.mech.psi_prime0();
  if (!std::isfinite(psi0p)) {
    throw std::invalid_argument("clt_check: hypothesis (H) fails");
  }
  norm.a_t = (config.env.mean_rate() - psi0p) * t;
  CBLREConfig cfg = config;
  cfg.horizon = t;

  std::vector<double> finals(static_cast<std::size_t>(n_paths));
  std::vector<unsigned char> capped(static_cast<std::size_t>(n_paths), 0);
  parallel_for(
      n_paths,
      [&](std::int64_t i) {
        const std::uint64_t pseed = stream_key(seed, stream_tag::env_path,
                                               static_cast<std::uint64_t>(i));
        EnvironmentPath path = sample_path(cfg.env, t, cfg.dt, pseed);
        const std::uint64_t bseed = stream_key(seed, stream_tag::branching,
                                               static_cast<std::uint64_t>(i));
        Trajectory traj = simulate(cfg, path, bseed);
        capped[static_cast<std::size_t>(i)] =
            traj.status == TrajStatus::ExplodedCap;
        finals[static_cast<std::size_t>(i)] =
            traj.status == TrajStatus::Alive ? traj.final_value() : 0.0;
      },
      threads);
  int n_capped = 0;
  for (auto c : capped) n_capped += c;
  if (n_capped > 0) {
    throw std::runtime_error(
        "clt_check: " + std::to_string(n_capped) +
        " path(s) hit the explosion cap; raise z_max above the horizon growth");
  }

  CltReport rep;
  rep.n_paths = n_paths;
  rep.a_t = norm.a_t;
  rep.b_t = norm.b_t;
  for (double zf : finals) {
    if (zf > threshold) {
      rep.standardized.push_back((std::log(zf) - norm.a_t) / norm.b_t);
    }
  }
  for (double th : {1e-4, 1e-6, 1e-8}) {
    int cnt = 0;
    for (double zf : finals) cnt += zf > th;
    rep.threshold_sensitivity.emplace_back(th, cnt);
  }
  rep.survivors = static_cast<int>(rep.standardized.size());
  if (rep.survivors < 100) {
    rep.conclusive = false;  // too few survivors to test
    return rep;
  }
  rep.ks_stat = ks_statistic(rep.standardized, normal_cdf);
  rep.p_value = ks_pvalue(rep.ks_stat, rep.standardized.size());
  rep.conclusive = true;
  return rep;
}

}  // namespace cblre
