#include "cblre/backward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cblre {

namespace {

// Linear description of K on one path cell, approaching the left limit at
// the right endpoint.
struct CellLine {
  double t0, t1;
  double k0, k1;  // k1 is the left limit K(t1-)
  double value(double s) const {
    if (t1 == t0) return k0;
    return k0 + (s - t0) / (t1 - t0) * (k1 - k0);
  }
  double slope() const { return t1 == t0 ? 0.0 : (k1 - k0) / (t1 - t0); }
};

CellLine cell_line(const EnvironmentPath& path, std::size_t i) {
  return {path.times[i], path.times[i + 1], path.values[i],
          path.left_value(i + 1)};
}

enum class RhsMode { Psi0, FullPsi };

double rhs(const BranchingMechanism& mech, RhsMode mode, double k, double v) {
  const double ek = std::exp(k);
  const double th = v / ek;
  return mode == RhsMode::Psi0 ? ek * mech.psi0(th) : ek * mech.psi(th);
}

// One classical RK4 step backward from s to s - h along a linear K segment.
double rk4_back(const BranchingMechanism& mech, RhsMode mode,
                const CellLine& line, double s, double v, double h) {
  const double k1 = rhs(mech, mode, line.value(s), v);
  const double k2 = rhs(mech, mode, line.value(s - 0.5 * h), v - 0.5 * h * k1);
  const double k3 = rhs(mech, mode, line.value(s - 0.5 * h), v - 0.5 * h * k2);
  const double k4 = rhs(mech, mode, line.value(s - h), v - h * k3);
  return v - h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

VSolution solve_backward(const EnvironmentPath& path, double t, double lambda,
                         const BranchingMechanism& mech, RhsMode mode,
                         const SolveOptions& opts) {
  if (!(lambda >= 0)) throw std::invalid_argument("solve_v: lambda >= 0");
  if (!(t > 0) || t > path.horizon + 1e-12) {
    throw std::invalid_argument("solve_v: need 0 < t <= path horizon");
  }
  if (mode == RhsMode::Psi0 && !mech.hypothesis_H()) {
    throw std::invalid_argument("solve_v: hypothesis (H) fails");
  }

  VSolution sol;
  sol.t = t;
  sol.lambda = lambda;

  // collect in backward order, reverse at the end
  std::vector<double> ss, vv, kk;
  double v = lambda;
  double bound_G = 0.0;  // int_s^t Phi(lambda e^{-K_u}) du for the floor
  const bool enforce = mode == RhsMode::Psi0;
  const double cap = lambda * (1.0 + 1e-8) + 1e-300;

  const std::size_t i_t = path.cell_index(t);
  ss.push_back(t);
  vv.push_back(v);
  {
    CellLine line = cell_line(path, i_t);
    kk.push_back(t == path.times[i_t + 1] ? line.k1 : line.value(t));
  }

  for (std::size_t ci = i_t + 1; ci-- > 0;) {
    CellLine line = cell_line(path, ci);
    double s_hi = std::min(t, line.t1);
    const double s_lo = line.t0;
    if (s_hi <= s_lo) continue;
    double s = s_hi;
    while (s > s_lo + 1e-15 * std::max(1.0, t)) {
      double h = std::min({opts.max_step, s - s_lo});
      for (;;) {
        const double full = rk4_back(mech, mode, line, s, v, h);
        const double half = rk4_back(mech, mode, line, s, v, 0.5 * h);
        const double two = rk4_back(mech, mode, line, s - 0.5 * h, half, 0.5 * h);
        const double err = std::abs(two - full) / 15.0;
        const double scale = std::max(std::abs(two), lambda * 1e-6 + 1e-300);
        bool ok = err <= opts.rel_tol * scale;
        double v_new = two + (two - full) / 15.0;
        if (enforce && ok) {
          if (v_new > cap) ok = false;  // v never exceeds lambda (psi0 >= 0)
          if (v_new > v * (1.0 + 1e-12) + 1e-300) ok = false;  // monotone
        }
        if (ok) {
          if (enforce) v_new = std::min({v_new, lambda, v});
          if (enforce) {
            const double g0 = mech.Phi(lambda * std::exp(-line.value(s)));
            const double g1 = mech.Phi(lambda * std::exp(-line.value(s - h)));
            bound_G += 0.5 * h * (g0 + g1);
            const double floor = lambda * std::exp(-bound_G);
            if (v_new < floor * (1.0 - 1e-6) - 1e-300) {
              char buf[160];
              std::snprintf(buf, sizeof buf,
                            "solve_v: lower-bound violation at s=%g "
                            "(v=%.12g floor=%.12g)",
                            s - h, v_new, floor);
              throw std::runtime_error(buf);
            }
          }
          sol.stats.err_estimate += err;
          sol.stats.steps += 1;
          sol.stats.max_step_used = std::max(sol.stats.max_step_used, h);
          v = v_new;
          s -= h;
          ss.push_back(s);
          vv.push_back(v);
          kk.push_back(line.value(s));
          break;
        }
        sol.stats.rejects += 1;
        h *= 0.5;
        if (h < 1e-14 * std::max(1.0, t)) {
          throw std::runtime_error("solve_v: step underflow");
        }
      }
    }
  }

  std::reverse(ss.begin(), ss.end());
  std::reverse(vv.begin(), vv.end());
  std::reverse(kk.begin(), kk.end());
  sol.s = std::move(ss);
  sol.v = std::move(vv);
  sol.k = std::move(kk);

  const double rel =
      sol.stats.err_estimate / std::max(std::abs(sol.v0()), 1e-300);
  if (lambda > 0 && rel > opts.richardson_target) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "solve_v: accumulated error estimate %.3g above target %.3g",
                  rel, opts.richardson_target);
    throw std::runtime_error(buf);
  }
  return sol;
}

}  // namespace

double VSolution::at(double si) const {
  if (si <= s.front()) return v.front();
  if (si >= s.back()) return v.back();
  const auto it = std::upper_bound(s.begin(), s.end(), si);
  const std::size_t i = static_cast<std::size_t>(it - s.begin()) - 1;
  const double w = (si - s[i]) / (s[i + 1] - s[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

VSolution solve_v(const EnvironmentPath& path, double t, double lambda,
                  const BranchingMechanism& mech, const SolveOptions& opts) {
  return solve_backward(path, t, lambda, mech, RhsMode::Psi0, opts);
}

VSolution solve_v_full(const EnvironmentPath& path, double t, double lambda,
                       const BranchingMechanism& mech,
                       const SolveOptions& opts) {
  if (path.variant == EnvVariant::K) {
    throw std::invalid_argument("solve_v_full: expects a K0/S path view");
  }
  return solve_backward(path, t, lambda, mech, RhsMode::FullPsi, opts);
}

double conditional_laplace(const EnvironmentPath& path, double z, double lambda,
                           double t, const BranchingMechanism& mech,
                           const std::optional<ImmigrationMechanism>& imm,
                           const SolveOptions& opts) {
  if (!(z >= 0)) throw std::invalid_argument("conditional_laplace: z >= 0");
  VSolution sol = solve_v(path, t, lambda, mech, opts);
  double integral = 0.0;
  if (imm && !imm->empty()) {
    for (std::size_t i = 0; i + 1 < sol.s.size(); ++i) {
      const double f0 = imm->phi(sol.v[i] * std::exp(-sol.k[i]));
      const double f1 = imm->phi(sol.v[i + 1] * std::exp(-sol.k[i + 1]));
      integral += 0.5 * (sol.s[i + 1] - sol.s[i]) * (f0 + f1);
    }
  }
  return std::exp(-z * sol.v0() - integral);
}

double integral_exp_of_K(const EnvironmentPath& path, double s0, double s1,
                         double coeff) {
  if (!(s1 >= s0)) throw std::invalid_argument("integral_exp_of_K: s1 >= s0");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double a = std::max(s0, path.times[i]);
    const double b = std::min(s1, path.times[i + 1]);
    if (b <= a) continue;
    CellLine line = cell_line(path, i);
    const double ka = line.value(a);
    const double kb = line.value(b);
    const double g = coeff * line.slope();
    if (std::abs(g * (b - a)) < 1e-12) {
      acc += 0.5 * (b - a) * (std::exp(coeff * ka) + std::exp(coeff * kb));
    } else {
      acc += (std::exp(coeff * kb) - std::exp(coeff * ka)) / g;
    }
  }
  return acc;
}

double integral_expdecay_times_K(const EnvironmentPath& path, double s0,
                                 double s1) {
  if (!(s1 >= s0)) {
    throw std::invalid_argument("integral_expdecay_times_K: s1 >= s0");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double a = std::max(s0, path.times[i]);
    const double b = std::min(s1, path.times[i + 1]);
    if (b <= a) continue;
    CellLine line = cell_line(path, i);
    const double beta = line.slope();
    // primitive of e^{-u} K(u) is -e^{-u} (K(u) + beta)
    acc += std::exp(-a) * (line.value(a) + beta) -
           std::exp(-b) * (line.value(b) + beta);
  }
  return acc;
}

double neveu_v(const EnvironmentPath& path_k0, double t, double lambda,
               double s) {
  if (!(lambda > 0)) {
    throw std::invalid_argument("neveu_v: lambda must be > 0");
  }
  if (path_k0.variant == EnvVariant::K) {
    throw std::invalid_argument("neveu_v: expects a K0/S path");
  }
  if (!(s >= 0) || !(s <= t)) throw std::invalid_argument("neveu_v: 0 <= s <= t");
  const double J = integral_expdecay_times_K(path_k0, s, t);
  return std::exp(std::exp(s) * (J + std::exp(-t) * std::log(lambda)));
}

double neveu_laplace(double z, double lambda, const EnvironmentPath& path_k0,
                     double t) {
  if (!(z > 0) || !(lambda > 0)) {
    throw std::invalid_argument("neveu_laplace: z, lambda > 0");
  }
  const double v0 = neveu_v(path_k0, t, lambda, 0.0);
  return std::exp(-z * v0);
}

NeveuExtinction neveu_extinction(double z, const LevyTriplet& triplet_k0,
                                 double T_trunc, double dt, int n_mc,
                                 std::uint64_t seed, int threads) {
  if (!(z > 0) || !(T_trunc > 0) || n_mc < 2) {
    throw std::invalid_argument("neveu_extinction: bad arguments");
  }
  if (!std::isfinite(triplet_k0.mean_rate())) {
    throw std::invalid_argument("neveu_extinction: E|K_1| must be finite");
  }
  std::vector<double> vals(static_cast<std::size_t>(n_mc));
  parallel_for(
      n_mc,
      [&](std::int64_t i) {
        const std::uint64_t s =
            stream_key(seed, stream_tag::neveu, static_cast<std::uint64_t>(i));
        EnvironmentPath path = sample_path(triplet_k0, T_trunc, dt, s);
        // Y = int_0^T e^{-s} dK_s via integration by parts
        const double Y = -std::exp(-T_trunc) * path.final_value() +
                         integral_expdecay_times_K(path, 0.0, T_trunc);
        vals[static_cast<std::size_t>(i)] = std::exp(-z * std::exp(Y));
      },
      threads);
  NeveuExtinction out;
  out.estimate = stream_accumulate(vals);
  const double m = triplet_k0.mean_rate() * T_trunc;
  const double var = triplet_k0.variance_rate() * T_trunc;
  out.truncation_bound = std::exp(-T_trunc) * std::sqrt(m * m + var);
  return out;
}

namespace {
void check_stable_args(double alpha, double c) {
  const bool ok_alpha = (alpha > 0 && alpha < 1) || (alpha > 1 && alpha <= 2);
  if (!ok_alpha || !(c * (alpha - 1) > 0)) {
    throw std::invalid_argument(
        "stable: need alpha in (0,1) u (1,2] and c(alpha-1) > 0");
  }
}
}  // namespace

double stable_v(const EnvironmentPath& path_k0, double t, double s,
                double lambda, double alpha, double c) {
  check_stable_args(alpha, c);
  if (!(lambda > 0)) throw std::invalid_argument("stable_v: lambda > 0");
  if (path_k0.variant == EnvVariant::K) {
    throw std::invalid_argument("stable_v: expects a K0/S path");
  }
  const double I = integral_exp_of_K(path_k0, s, t, -(alpha - 1.0));
  const double base = std::pow(lambda, 1.0 - alpha) + (alpha - 1.0) * c * I;
  return std::pow(base, -1.0 / (alpha - 1.0));
}

StableProbs stable_probs(double z, const EnvironmentPath& path_k0, double t,
                         double alpha, double c) {
  check_stable_args(alpha, c);
  if (!(z > 0)) throw std::invalid_argument("stable_probs: z > 0");
  const double I = integral_exp_of_K(path_k0, 0.0, t, -(alpha - 1.0));
  const double arg =
      std::pow((alpha - 1.0) * c * I, -1.0 / (alpha - 1.0));
  StableProbs p;
  if (alpha > 1) {
    p.survival = 1.0 - std::exp(-z * arg);
    p.non_explosion = 1.0;
  } else {
    p.survival = 1.0;
    p.non_explosion = std::exp(-z * arg);
  }
  return p;
}

double stable_survival_from(double z_state, const EnvironmentPath& path_k0,
                            double t0, double t, double alpha, double c) {
  check_stable_args(alpha, c);
  if (!(alpha > 1)) {
    throw std::invalid_argument("stable_survival_from: needs alpha > 1");
  }
  if (!(t0 >= 0) || !(t0 < t)) {
    throw std::invalid_argument("stable_survival_from: need 0 <= t0 < t");
  }
  if (!(z_state >= 0)) return 1.0;
  if (std::isinf(z_state)) return 1.0;
  if (z_state == 0.0) return 0.0;
  const double k0 = path_k0.value_at(t0);
  const double I = std::exp((alpha - 1.0) * k0) *
                   integral_exp_of_K(path_k0, t0, t, -(alpha - 1.0));
  const double arg = std::pow((alpha - 1.0) * c * I, -1.0 / (alpha - 1.0));
  return 1.0 - std::exp(-z_state * arg);
}

void write_vsolution_csv(const VSolution& sol, std::ostream& os) {
  os << "s,v\n";
  char buf[80];
  for (std::size_t i = 0; i < sol.s.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", sol.s[i], sol.v[i]);
    os << buf;
  }
}

}  // namespace cblre
