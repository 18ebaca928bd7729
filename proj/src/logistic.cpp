#include "cblre/logistic.hpp"

#include <cmath>
#include <stdexcept>

#include "cblre/backward.hpp"
#include "cblre/numerics.hpp"

namespace cblre {

Trajectory logistic_exact_solution(const EnvironmentPath& k_path, double z0,
                                   double k) {
  if (!(z0 > 0) || !(k > 0)) {
    throw std::invalid_argument("logistic: need z0 > 0 and k > 0");
  }
  const std::vector<double> I = exp_functional_running(k_path, +1);
  Trajectory traj;
  traj.times = k_path.times;
  traj.values.resize(k_path.times.size());
  for (std::size_t i = 0; i < k_path.times.size(); ++i) {
    traj.values[i] =
        z0 * std::exp(k_path.values[i]) / (1.0 + k * z0 * I[i]);
  }
  traj.status = TrajStatus::Alive;
  return traj;
}

double logistic_stationary_moment(const LevyTriplet& env_k, double k, int n) {
  if (n < 1) throw std::invalid_argument("stationary_moment: n >= 1");
  if (!(k > 0)) throw std::invalid_argument("stationary_moment: k > 0");
  const double mean = env_k.mean_rate();
  if (!(mean > 0)) {
    throw std::invalid_argument(
        "stationary_moment: K must drift to +infinity (E[K_1] > 0)");
  }
  if (std::isfinite(env_k.exp_moment_bound_pos()) &&
      env_k.exp_moment_bound_pos() <= static_cast<double>(n - 1)) {
    throw std::invalid_argument(
        "stationary_moment: exponential moments unavailable at this order");
  }
  double prod = mean;
  double fact = 1.0;
  for (int j = 1; j <= n - 1; ++j) {
    prod *= env_k.psi(static_cast<double>(j));
    fact *= static_cast<double>(j);
  }
  return std::pow(k, -n) * prod / fact;
}

double logistic_time_average(const EnvironmentPath& k_path, double z0,
                             double k) {
  if (!(z0 > 0) || !(k > 0)) {
    throw std::invalid_argument("time_average: need z0 > 0 and k > 0");
  }
  const double I = exp_functional(k_path, +1);
  return std::log1p(k * z0 * I) / (k * k_path.horizon);
}

namespace {

// in-cell closed form: Z(s) = z e^{K(s)} / (1 + k z (I0 + int_{t0}^{s} e^K))
struct CellState {
  double t0, t1, k0, k1;  // K linear on [t0,t1], k1 the left limit
  double I0;              // running integral up to t0
  double z0k;             // k * z

  double kval(double s) const {
    return t1 == t0 ? k0 : k0 + (s - t0) / (t1 - t0) * (k1 - k0);
  }
  double integ(double s) const {  // int_{t0}^{s} e^{K(u)} du, exact
    const double slope = t1 == t0 ? 0.0 : (k1 - k0) / (t1 - t0);
    if (std::abs(slope * (s - t0)) < 1e-12) {
      return 0.5 * (s - t0) * (std::exp(k0) + std::exp(kval(s)));
    }
    return (std::exp(kval(s)) - std::exp(k0)) / slope;
  }
  double z(double s, double zinit) const {
    return zinit * std::exp(kval(s)) / (1.0 + z0k * (I0 + integ(s)));
  }
};

}  // namespace

PassageResult first_passage_laplace(double z, double b, double lambda,
                                    const LevyTriplet& env_k, double k,
                                    const PassageMCConfig& mc) {
  if (!(b > 0) || !(b <= z)) {
    throw std::invalid_argument("first_passage: need 0 < b <= z");
  }
  if (!(lambda >= 0)) throw std::invalid_argument("first_passage: lambda >= 0");
  if (!(k > 0)) throw std::invalid_argument("first_passage: k > 0");
  if (!env_k.spectrally_positive()) {
    throw std::invalid_argument("first_passage: K must have no negative jumps");
  }
  if (!(env_k.mean_rate() < 0)) {
    throw std::invalid_argument("first_passage: K must drift to -infinity");
  }

  const double kappa = esscher_kappa(env_k, lambda);
  if (!(kappa > 1.0)) {
    throw std::invalid_argument("first_passage: kappa(lambda) must exceed 1");
  }
  const LevyTriplet tilted = esscher_tilt(env_k, kappa);
  const double tilted_mean = tilted.mean_rate();
  if (!(tilted_mean < 0)) {
    throw std::runtime_error("first_passage: tilted drift not negative");
  }
  // E[int_T^inf e^{K_s} ds | K_T] = e^{K_T} / (-psi(1)) when psi(1) < 0;
  // used both as the truncation criterion and as the tail completion
  double tail_scale = -1.0 / tilted_mean;
  {
    const double psi1 = tilted.psi(1.0);
    if (psi1 < 0) tail_scale = -1.0 / psi1;
  }

  PassageResult out;
  out.kappa = kappa;

  // ---- moment-ratio estimate under the tilted law ----
  struct Sums {
    double A = 0, B = 0, AA = 0, BB = 0, AB = 0, tail = 0;
  };
  std::vector<Sums> sums(static_cast<std::size_t>(mc.n_formula));
  parallel_for(
      mc.n_formula,
      [&](std::int64_t i) {
        double I = 0.0, k_off = 0.0, t = 0.0, tail = 0.0;
        for (int chunk = 0;; ++chunk) {
          const std::uint64_t s =
              stream_key(mc.seed, stream_tag::passage_formula,
                         static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(chunk));
          EnvironmentPath path = sample_path(tilted, mc.t_chunk, mc.dt, s);
          // exact integral of e^K for the piecewise-linear realized path,
          // so the deterministic-environment case is reproduced exactly
          I += std::exp(k_off) * integral_exp_of_K(path, 0.0, mc.t_chunk, 1.0);
          k_off += path.final_value();
          t += mc.t_chunk;
          tail = std::exp(k_off) * tail_scale;
          if (t >= mc.t_max || tail < 1e-8 * I) break;
        }
        I += tail;  // expected remainder; bounded by the reported tail term
        Sums& sm = sums[static_cast<std::size_t>(i)];
        const double A = std::pow(1.0 + k * z * I, kappa);
        const double B = std::pow(z / b + k * z * I, kappa);
        sm.A = A;
        sm.B = B;
        sm.AA = A * A;
        sm.BB = B * B;
        sm.AB = A * B;
        sm.tail = tail;
      },
      mc.threads);
  {
    const double n = static_cast<double>(mc.n_formula);
    Sums tot;
    for (const auto& s : sums) {
      tot.A += s.A;
      tot.B += s.B;
      tot.AA += s.AA;
      tot.BB += s.BB;
      tot.AB += s.AB;
      tot.tail += s.tail;
    }
    const double mA = tot.A / n, mB = tot.B / n;
    const double vA = (tot.AA / n - mA * mA) * n / (n - 1);
    const double vB = (tot.BB / n - mB * mB) * n / (n - 1);
    const double cAB = (tot.AB / n - mA * mB) * n / (n - 1);
    const double ratio = mA / mB;
    const double var_ratio =
        ratio * ratio *
        (vA / (mA * mA) + vB / (mB * mB) - 2.0 * cAB / (mA * mB)) / n;
    out.formula.mean = ratio;
    out.formula.se = std::sqrt(std::max(0.0, var_ratio));
    out.formula.n = mc.n_formula;
    out.tail_bound = tot.tail / n;
  }

  // ---- direct estimate: e^{-lambda sigma_b} from exact-solution paths ----
  std::vector<double> direct(static_cast<std::size_t>(mc.n_direct));
  std::vector<unsigned char> gaveup(static_cast<std::size_t>(mc.n_direct), 0);
  parallel_for(
      mc.n_direct,
      [&](std::int64_t i) {
        if (b == z) {
          direct[static_cast<std::size_t>(i)] = 1.0;  // sigma_b = 0
          return;
        }
        double I = 0.0, k_off = 0.0, t_base = 0.0;
        double sigma = -1.0;
        for (int chunk = 0; t_base < mc.t_max && sigma < 0.0; ++chunk) {
          const std::uint64_t s =
              stream_key(mc.seed, stream_tag::passage_direct,
                         static_cast<std::uint64_t>(i),
                         static_cast<std::uint64_t>(chunk));
          EnvironmentPath path = sample_path(env_k, mc.t_chunk, mc.dt, s);
          for (std::size_t c = 0; c + 1 < path.times.size(); ++c) {
            CellState cell{path.times[c],       path.times[c + 1],
                           k_off + path.values[c],
                           k_off + path.left_value(c + 1), I, k * z};
            const double za = cell.z(cell.t0, z);
            const double zb_left = cell.z(cell.t1, z);
            if (za > b && zb_left <= b) {
              const double root = brent_root(
                  [&](double u) { return cell.z(u, z) - b; }, cell.t0, cell.t1,
                  1e-13);
              sigma = t_base + root;
              break;
            }
            I = cell.I0 + cell.integ(cell.t1);
            // K jumps are non-negative here, so Z jumps away from b
          }
          if (sigma >= 0.0) break;
          k_off += path.final_value();
          t_base += mc.t_chunk;
        }
        if (sigma < 0.0) {
          gaveup[static_cast<std::size_t>(i)] = 1;
          direct[static_cast<std::size_t>(i)] = 0.0;  // e^{-lambda * inf}
        } else {
          direct[static_cast<std::size_t>(i)] = std::exp(-lambda * sigma);
        }
      },
      mc.threads);
  out.direct = stream_accumulate(direct);
  for (auto g : gaveup) out.direct_giveups += g;
  return out;
}

}  // namespace cblre
