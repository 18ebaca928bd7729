#include "cblre/levy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cblre/numerics.hpp"

namespace cblre {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LevyTriplet::LevyTriplet(double drift, double gaussian_sd,
                         std::vector<JumpComponent> comps, EnvVariant variant,
                         std::optional<double> psi_prime0, double small_jump_var)
    : drift_(drift),
      sigma_(gaussian_sd),
      comps_(std::move(comps)),
      variant_(variant),
      psi_prime0_(psi_prime0),
      small_jump_var_(small_jump_var) {
  if (!(sigma_ >= 0)) throw std::invalid_argument("gaussian_sd must be >= 0");
  if (!(small_jump_var_ >= 0)) {
    throw std::invalid_argument("small_jump_var must be >= 0");
  }
  for (const auto& c : comps_) {
    if (!(c.rate > 0)) throw std::invalid_argument("component rate must be > 0");
  }
  double eff = drift_;
  if (variant_ == EnvVariant::S) {
    eff -= 0.5 * sigma_ * sigma_;
    for (const auto& c : comps_) {
      if (c.compensated) eff -= c.rate * c.law.exp_minus_one_inside(-1.0, 1.0);
    }
  } else {
    for (const auto& c : comps_) {
      if (c.compensated) eff -= c.mean_in_window();
    }
  }
  effective_drift_ = eff;
}

LevyTriplet make_environment(double alpha, double sigma,
                             std::vector<JumpComponent> pi, EnvVariant variant,
                             std::optional<double> psi_prime0,
                             double small_jump_var) {
  if (variant == EnvVariant::K &&
      (!psi_prime0 || !std::isfinite(*psi_prime0))) {
    throw std::invalid_argument(
        "make_environment: variant K needs a finite psi'(0+)");
  }
  for (auto& c : pi) c.compensated = true;  // Poisson measure compensated on (-1,1)
  double dd = 0.0;  // int_{(-1,1)} (e^v - 1 - v) pi(dv)
  for (const auto& c : pi) {
    const double d = c.rate * c.law.dd_inside(-1.0, 1.0);
    if (!std::isfinite(d)) {
      throw std::invalid_argument("make_environment: non-integrable jump measure");
    }
    dd += d;
  }
  double drift = alpha;
  switch (variant) {
    case EnvVariant::S:
      break;  // raw drift kept; DD correction folds into the effective drift
    case EnvVariant::K:
      drift = alpha - *psi_prime0 - 0.5 * sigma * sigma - dd;
      break;
    case EnvVariant::K0:
      drift = alpha - 0.5 * sigma * sigma - dd;
      break;
  }
  return LevyTriplet(drift, sigma, std::move(pi), variant, psi_prime0,
                     small_jump_var);
}

double LevyTriplet::mean_rate() const {
  double m = effective_drift_;
  for (const auto& c : comps_) m += c.rate * c.law.mean();
  return m;
}

double LevyTriplet::variance_rate() const {
  double v = sigma_ * sigma_;
  for (const auto& c : comps_) v += c.rate * c.law.second_moment();
  return v;
}

double LevyTriplet::exp_moment_bound_pos() const {
  double b = kInf;
  for (const auto& c : comps_) b = std::min(b, c.law.mgf_domain_hi());
  return b;
}

double LevyTriplet::exp_moment_bound_neg() const {
  double b = kInf;
  for (const auto& c : comps_) b = std::min(b, -c.law.mgf_domain_lo());
  return b;
}

double LevyTriplet::psi(double q) const {
  if (q > 0 && q >= exp_moment_bound_pos()) {
    throw std::invalid_argument("psi: q beyond the exponential-moment bound");
  }
  if (q < 0 && -q >= exp_moment_bound_neg()) {
    throw std::invalid_argument("psi: -q beyond the exponential-moment bound");
  }
  double r = effective_drift_ * q + 0.5 * sigma_ * sigma_ * q * q;
  for (const auto& c : comps_) r += c.rate * (c.law.mgf(q) - 1.0);
  return r;
}

bool LevyTriplet::spectrally_positive() const {
  for (const auto& c : comps_) {
    if (c.law.min_support() < 0) return false;
  }
  return true;
}

double LevyTriplet::upper_tail(double x) const {
  double t = 0;
  for (const auto& c : comps_) t += c.rate * c.law.tail(x);
  return t;
}

double LevyTriplet::lower_tail(double x) const {
  double t = 0;
  for (const auto& c : comps_) {
    // strict lower tail pi((-inf,-x)); subtract a point mass sitting at -x
    double p = c.law.cdf(-x);
    const double atom = c.law.cdf(-x) - c.law.cdf(std::nextafter(-x, -kInf));
    t += c.rate * std::max(0.0, p - atom);
  }
  return t;
}

std::string LevyTriplet::describe() const {
  char buf[128];
  const char* v = variant_ == EnvVariant::S ? "S"
                  : variant_ == EnvVariant::K ? "K"
                                              : "K0";
  std::snprintf(buf, sizeof buf, "triplet[%s drift=%g sigma=%g ncomp=%zu]", v,
                drift_, sigma_, comps_.size());
  return buf;
}

double EnvironmentPath::value_at(double t) const {
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const std::size_t i = cell_index(t);
  if (t == times[i]) return values[i];
  const double len = times[i + 1] - times[i];
  const double frac = (t - times[i]) / len;
  // approach the left limit of the right endpoint
  return values[i] + frac * (left_value(i + 1) - values[i]);
}

std::size_t EnvironmentPath::cell_index(double t) const {
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t i = static_cast<std::size_t>(it - times.begin());
  if (i == 0) return 0;
  --i;
  return std::min(i, times.size() - 2);
}

EnvironmentPath sample_path(const LevyTriplet& triplet, double T, double dt,
                            std::uint64_t seed, const PathOptions& opts) {
  if (!(T > 0) || !(dt > 0) || dt > T) {
    throw std::invalid_argument("sample_path: need 0 < dt <= T");
  }
  Rng rng = make_stream(seed, stream_tag::env_path);

  std::vector<double> base;
  base.push_back(0.0);
  for (double t = dt; t < T - 1e-12 * std::max(1.0, T); t += dt) base.push_back(t);
  base.push_back(T);

  // jump events, drawn per component and per base cell
  struct Event {
    double t;
    double z;
    std::size_t seq;
  };
  std::vector<Event> events;
  std::size_t seq = 0;
  for (const auto& comp : triplet.components()) {
    for (std::size_t j = 0; j + 1 < base.size(); ++j) {
      const double len = base[j + 1] - base[j];
      const long long n = rng.poisson(comp.rate * len);
      for (long long k = 0; k < n; ++k) {
        double t = base[j] + rng.uniform_pos() * len;
        if (t >= base[j + 1]) t = std::nextafter(base[j + 1], 0.0);
        events.push_back({t, comp.law.sample(rng), seq++});
      }
    }
  }
  std::sort(events.begin(), events.end(), [](const Event& a, const Event& b) {
    return a.t != b.t ? a.t < b.t : a.seq < b.seq;
  });

  // refined grid: union of base grid and jump times
  EnvironmentPath path;
  path.variant = triplet.variant();
  path.horizon = T;
  path.drift_effective = triplet.effective_drift();
  path.sigma = triplet.gaussian_sd();
  path.times.reserve(base.size() + events.size());
  path.jump_at.reserve(base.size() + events.size());
  std::size_t ib = 0, ie = 0;
  while (ib < base.size() || ie < events.size()) {
    double t;
    double z = 0.0;
    if (ie >= events.size() || (ib < base.size() && base[ib] <= events[ie].t)) {
      t = base[ib++];
      while (ie < events.size() && events[ie].t == t) z += events[ie++].z;
    } else {
      t = events[ie].t;
      while (ie < events.size() && events[ie].t == t) z += events[ie++].z;
    }
    path.times.push_back(t);
    path.jump_at.push_back(z);
  }

  const std::size_t n_cells = path.times.size() - 1;
  path.brownian.resize(n_cells);
  for (std::size_t i = 0; i < n_cells; ++i) {
    const double len = path.times[i + 1] - path.times[i];
    path.brownian[i] = std::sqrt(len) * rng.normal();
  }
  const bool small = opts.gaussian_correction && triplet.small_jump_var() > 0;
  if (small) {
    path.small_noise.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
      const double len = path.times[i + 1] - path.times[i];
      path.small_noise[i] = std::sqrt(triplet.small_jump_var() * len) * rng.normal();
    }
  }

  path.values.resize(path.times.size());
  path.values[0] = 0.0;
  if (path.jump_at[0] != 0.0) {
    // a jump cannot land at time 0 (uniform draws are strictly positive)
    throw std::logic_error("sample_path: jump at t=0");
  }
  for (std::size_t i = 0; i < n_cells; ++i) {
    const double len = path.times[i + 1] - path.times[i];
    double incr = path.drift_effective * len + path.sigma * path.brownian[i];
    if (small) incr += path.small_noise[i];
    path.values[i + 1] = path.values[i] + incr + path.jump_at[i + 1];
  }
  return path;
}

EnvironmentPath as_variant(const EnvironmentPath& path, EnvVariant target,
                           std::optional<double> psi_prime0) {
  EnvironmentPath out = path;
  out.variant = target;
  const bool from_k = path.variant == EnvVariant::K;
  const bool to_k = target == EnvVariant::K;
  if (from_k == to_k) return out;  // S <-> K0 share values
  if (!psi_prime0 || !std::isfinite(*psi_prime0)) {
    throw std::invalid_argument("as_variant: finite psi'(0+) required");
  }
  const double shift = to_k ? -*psi_prime0 : *psi_prime0;
  for (std::size_t i = 0; i < out.times.size(); ++i) {
    out.values[i] += shift * out.times[i];
  }
  out.drift_effective += shift;
  return out;
}

EnvironmentPath coarsen_path(const EnvironmentPath& path, int factor,
                             double dt_fine) {
  if (factor < 1) throw std::invalid_argument("coarsen_path: factor >= 1");
  EnvironmentPath out;
  out.variant = path.variant;
  out.horizon = path.horizon;
  out.drift_effective = path.drift_effective;
  out.sigma = path.sigma;
  const double dt_coarse = dt_fine * factor;
  const double tol = 1e-9 * std::max(1.0, path.horizon);
  double acc_b = 0.0, acc_s = 0.0;
  const bool small = !path.small_noise.empty();
  out.times.push_back(path.times.front());
  out.jump_at.push_back(path.jump_at.front());
  out.values.push_back(path.values.front());
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    acc_b += path.brownian[i];
    if (small) acc_s += path.small_noise[i];
    const double t = path.times[i + 1];
    const bool is_jump = path.jump_at[i + 1] != 0.0;
    const double ratio = t / dt_coarse;
    const bool on_coarse = std::abs(ratio - std::round(ratio)) < tol ||
                           std::abs(t - path.horizon) < tol;
    if (is_jump || on_coarse) {
      out.times.push_back(t);
      out.jump_at.push_back(path.jump_at[i + 1]);
      out.values.push_back(path.values[i + 1]);
      out.brownian.push_back(acc_b);
      if (small) out.small_noise.push_back(acc_s);
      acc_b = acc_s = 0.0;
    }
  }
  return out;
}

double exp_functional(const EnvironmentPath& path, int sign) {
  const double s = sign >= 0 ? 1.0 : -1.0;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double len = path.times[i + 1] - path.times[i];
    acc += 0.5 * len *
           (std::exp(s * path.values[i]) + std::exp(s * path.left_value(i + 1)));
  }
  return acc;
}

std::vector<double> exp_functional_running(const EnvironmentPath& path,
                                           int sign) {
  const double s = sign >= 0 ? 1.0 : -1.0;
  std::vector<double> out(path.times.size());
  out[0] = 0.0;
  for (std::size_t i = 0; i + 1 < path.times.size(); ++i) {
    const double len = path.times[i + 1] - path.times[i];
    out[i + 1] = out[i] + 0.5 * len * (std::exp(s * path.values[i]) +
                                       std::exp(s * path.left_value(i + 1)));
  }
  return out;
}

double esscher_kappa(const LevyTriplet& triplet, double lambda) {
  if (!(lambda >= 0)) throw std::invalid_argument("esscher_kappa: lambda >= 0");
  const double bound = triplet.exp_moment_bound_neg();
  auto f = [&](double u) { return triplet.psi_hat(u) - lambda; };
  const double d0 = -triplet.mean_rate();  // psi_hat'(0)
  if (lambda == 0.0 && d0 >= 0.0) return 0.0;

  // bracket the largest crossing to the right of the convex minimum
  double lo = lambda > 0.0 ? 0.0 : 1e-12;
  if (lambda == 0.0 && f(lo) >= 0.0) return 0.0;  // degenerate slope
  double hi = 1.0;
  for (int it = 0;; ++it) {
    if (hi >= bound) {
      hi = std::nextafter(bound, 0.0);
      if (f(hi) < 0.0) {
        throw std::invalid_argument(
            "esscher_kappa: lambda unreachable within the moment domain");
      }
      break;
    }
    if (f(hi) > 0.0) break;
    hi *= 2.0;
    if (it > 200) {
      throw std::invalid_argument("esscher_kappa: lambda unreachable");
    }
  }
  const double root = brent_root(f, lo, hi, 1e-15);
  if (std::abs(f(root)) > 1e-10) {
    throw std::runtime_error("esscher_kappa: root refinement failed");
  }
  return root;
}

LevyTriplet esscher_tilt(const LevyTriplet& triplet, double kappa) {
  if (kappa == 0.0) return triplet;
  const double drift =
      triplet.effective_drift() - kappa * triplet.gaussian_sd() * triplet.gaussian_sd();
  std::vector<JumpComponent> comps;
  comps.reserve(triplet.components().size());
  for (const auto& c : triplet.components()) {
    auto tilted = c.law.tilt(kappa);
    const double rate = c.rate * tilted.factor;
    if (!std::isfinite(rate)) {
      throw std::invalid_argument("esscher_tilt: tilted rate not finite");
    }
    comps.push_back({rate, tilted.law, false});
  }
  // all compensators are folded into the stored drift, so the tilted triplet
  // is expressed with uncompensated components; variant semantics carry over
  // only for K/K0 (the DD correction of S would double-count)
  const EnvVariant v =
      triplet.variant() == EnvVariant::S ? EnvVariant::K0 : triplet.variant();
  return LevyTriplet(drift, triplet.gaussian_sd(), std::move(comps), v,
                     triplet.branching_psi_prime0(), triplet.small_jump_var());
}

void write_path_csv(const EnvironmentPath& path, std::ostream& os) {
  os << "time,K,jump_flag\n";
  char buf[80];
  for (std::size_t i = 0; i < path.times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%d\n", path.times[i],
                  path.values[i], path.jump_at[i] != 0.0 ? 1 : 0);
    os << buf;
  }
}

}  // namespace cblre
