#include "cblre/jump_law.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "cblre/numerics.hpp"

namespace cblre {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

double phi_pdf(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * 3.14159265358979323846);
}
}  // namespace

JumpLaw JumpLaw::dirac(double c) { return JumpLaw(Kind::Dirac, c, 0, 0); }

JumpLaw JumpLaw::normal(double mean, double sd) {
  if (!(sd > 0)) throw std::invalid_argument("normal law: sd must be > 0");
  return JumpLaw(Kind::Normal, mean, sd, 0);
}

JumpLaw JumpLaw::exponential(double mean) {
  if (!(mean > 0)) throw std::invalid_argument("exponential law: mean must be > 0");
  return JumpLaw(Kind::Exponential, mean, 0, 0);
}

JumpLaw JumpLaw::uniform(double a, double b) {
  if (!(a < b)) throw std::invalid_argument("uniform law: need a < b");
  return JumpLaw(Kind::Uniform, a, b, 0);
}

JumpLaw JumpLaw::two_point(double z1, double p1, double z2) {
  if (!(p1 >= 0 && p1 <= 1)) throw std::invalid_argument("two_point: p1 in [0,1]");
  return JumpLaw(Kind::TwoPoint, z1, p1, z2);
}

JumpLaw JumpLaw::from_density(const std::function<double(double)>& density,
                              double lo, double hi, double* total_mass,
                              int cells) {
  if (!(lo < hi) || cells < 8) {
    throw std::invalid_argument("from_density: bad interval or cell count");
  }
  auto data = std::make_shared<GridData>();
  const int n = cells;
  data->x.resize(n + 1);
  data->pdf.resize(n + 1);
  const double h = (hi - lo) / n;
  for (int i = 0; i <= n; ++i) {
    data->x[i] = lo + h * i;
    const double d = density(data->x[i]);
    if (!(d >= 0) || !std::isfinite(d)) {
      throw std::invalid_argument("from_density: density must be finite and >= 0");
    }
    data->pdf[i] = d;
  }
  // Trapezoid mass per cell (density treated as piecewise linear).
  data->cum.assign(n + 1, 0.0);
  for (int i = 0; i < n; ++i) {
    data->cum[i + 1] = data->cum[i] + 0.5 * h * (data->pdf[i] + data->pdf[i + 1]);
  }
  const double mass = data->cum[n];
  if (!(mass > 0)) throw std::invalid_argument("from_density: zero total mass");
  if (total_mass) *total_mass = mass;
  for (auto& p : data->pdf) p /= mass;
  for (auto& c : data->cum) c /= mass;
  JumpLaw law(Kind::Grid, lo, hi, 0);
  law.grid_ = data;
  data->mean = law.grid_integral([](double z) { return z; }, -kInf, kInf);
  data->m2 = law.grid_integral([](double z) { return z * z; }, -kInf, kInf);
  return law;
}

double JumpLaw::grid_integral(const std::function<double(double)>& w,
                              double lo, double hi) const {
  // 5-point Gauss-Legendre per (clipped) cell against the piecewise-linear
  // tabulated density; exact to machine precision for smooth weights.
  static const double gx[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                               0.5384693101056831, 0.9061798459386640};
  static const double gw[5] = {0.2369268850561891, 0.4786286704993665,
                               0.5688888888888889, 0.4786286704993665,
                               0.2369268850561891};
  const auto& g = *grid_;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < g.x.size(); ++i) {
    const double a = std::max(g.x[i], lo);
    const double b = std::min(g.x[i + 1], hi);
    if (b <= a) continue;
    const double h = g.x[i + 1] - g.x[i];
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    for (int j = 0; j < 5; ++j) {
      const double z = mid + half * gx[j];
      const double t = (z - g.x[i]) / h;
      const double dens = g.pdf[i] * (1.0 - t) + g.pdf[i + 1] * t;
      acc += half * gw[j] * w(z) * dens;
    }
  }
  return acc;
}

double JumpLaw::mean() const {
  switch (kind_) {
    case Kind::Dirac: return a_;
    case Kind::Normal: return a_;
    case Kind::Exponential: return a_;
    case Kind::Uniform: return 0.5 * (a_ + b_);
    case Kind::TwoPoint: return b_ * a_ + (1 - b_) * c_;
    case Kind::Grid: return grid_->mean;
  }
  return 0;
}

double JumpLaw::second_moment() const {
  switch (kind_) {
    case Kind::Dirac: return a_ * a_;
    case Kind::Normal: return a_ * a_ + b_ * b_;
    case Kind::Exponential: return 2 * a_ * a_;
    case Kind::Uniform: return (b_ * b_ * b_ - a_ * a_ * a_) / (3 * (b_ - a_));
    case Kind::TwoPoint: return b_ * a_ * a_ + (1 - b_) * c_ * c_;
    case Kind::Grid: return grid_->m2;
  }
  return 0;
}

double JumpLaw::mgf_domain_hi() const {
  return kind_ == Kind::Exponential ? 1.0 / a_ : kInf;
}

double JumpLaw::mgf_domain_lo() const { return -kInf; }

double JumpLaw::mgf(double theta) const {
  switch (kind_) {
    case Kind::Dirac: return std::exp(theta * a_);
    case Kind::Normal: return std::exp(theta * a_ + 0.5 * theta * theta * b_ * b_);
    case Kind::Exponential:
      return theta < 1.0 / a_ ? 1.0 / (1.0 - theta * a_) : kInf;
    case Kind::Uniform: {
      if (theta == 0) return 1.0;
      // e^{ta} expm1(u)/u with u = t(b-a); stable for tiny t
      const double u = theta * (b_ - a_);
      const double g = std::abs(u) < 1e-4
                           ? 1.0 + u / 2 + u * u / 6 + u * u * u / 24
                           : std::expm1(u) / u;
      return std::exp(theta * a_) * g;
    }
    case Kind::TwoPoint:
      return b_ * std::exp(theta * a_) + (1 - b_) * std::exp(theta * c_);
    case Kind::Grid:
      return grid_integral([theta](double z) { return std::exp(theta * z); },
                           -kInf, kInf);
  }
  return 0;
}

double JumpLaw::mgf_prime(double theta) const {
  switch (kind_) {
    case Kind::Dirac: return a_ * std::exp(theta * a_);
    case Kind::Normal:
      return (a_ + theta * b_ * b_) * mgf(theta);
    case Kind::Exponential:
      return theta < 1.0 / a_ ? a_ / ((1.0 - theta * a_) * (1.0 - theta * a_))
                              : kInf;
    case Kind::Uniform: {
      if (theta == 0) return mean();
      // d/dtheta of e^{ta} expm1(u)/u, u = t(b-a)
      const double u = theta * (b_ - a_);
      const double g = std::abs(u) < 1e-4
                           ? 1.0 + u / 2 + u * u / 6 + u * u * u / 24
                           : std::expm1(u) / u;
      const double gp = std::abs(u) < 1e-4
                            ? 0.5 + u / 3 + u * u / 8 + u * u * u / 30
                            : (u * std::exp(u) - std::expm1(u)) / (u * u);
      return std::exp(theta * a_) * (a_ * g + (b_ - a_) * gp);
    }
    case Kind::TwoPoint:
      return b_ * a_ * std::exp(theta * a_) + (1 - b_) * c_ * std::exp(theta * c_);
    case Kind::Grid:
      return grid_integral(
          [theta](double z) { return z * std::exp(theta * z); }, -kInf, kInf);
  }
  return 0;
}

double JumpLaw::cdf(double x) const {
  switch (kind_) {
    case Kind::Dirac: return x >= a_ ? 1.0 : 0.0;
    case Kind::Normal: return normal_cdf((x - a_) / b_);
    case Kind::Exponential: return x <= 0 ? 0.0 : 1.0 - std::exp(-x / a_);
    case Kind::Uniform:
      if (x <= a_) return 0.0;
      if (x >= b_) return 1.0;
      return (x - a_) / (b_ - a_);
    case Kind::TwoPoint: {
      const double zlo = std::min(a_, c_), zhi = std::max(a_, c_);
      const double plo = (a_ <= c_) ? b_ : 1 - b_;
      if (x < zlo) return 0.0;
      if (x < zhi) return plo;
      return 1.0;
    }
    case Kind::Grid: {
      const auto& g = *grid_;
      if (x <= g.x.front()) return 0.0;
      if (x >= g.x.back()) return 1.0;
      const auto it = std::upper_bound(g.x.begin(), g.x.end(), x);
      const std::size_t i = static_cast<std::size_t>(it - g.x.begin()) - 1;
      const double h = g.x[i + 1] - g.x[i];
      const double t = (x - g.x[i]) / h;
      const double p0 = g.pdf[i], p1 = g.pdf[i + 1];
      // integral of the linear density over [x_i, x]
      return g.cum[i] + h * (p0 * t + 0.5 * (p1 - p0) * t * t);
    }
  }
  return 0;
}

double JumpLaw::min_support() const {
  switch (kind_) {
    case Kind::Dirac: return a_;
    case Kind::Normal: return -kInf;
    case Kind::Exponential: return 0.0;
    case Kind::Uniform: return a_;
    case Kind::TwoPoint: return std::min(a_, c_);
    case Kind::Grid: return grid_->x.front();
  }
  return 0;
}

double JumpLaw::max_support() const {
  switch (kind_) {
    case Kind::Dirac: return a_;
    case Kind::Normal: return kInf;
    case Kind::Exponential: return kInf;
    case Kind::Uniform: return b_;
    case Kind::TwoPoint: return std::max(a_, c_);
    case Kind::Grid: return grid_->x.back();
  }
  return 0;
}

double JumpLaw::mean_inside(double lo, double hi) const {
  switch (kind_) {
    case Kind::Dirac: return (a_ > lo && a_ < hi) ? a_ : 0.0;
    case Kind::Normal: {
      const double al = (lo - a_) / b_, be = (hi - a_) / b_;
      return a_ * (normal_cdf(be) - normal_cdf(al)) -
             b_ * (phi_pdf(be) - phi_pdf(al));
    }
    case Kind::Exponential: {
      const double l = std::max(lo, 0.0);
      if (l >= hi) return 0.0;
      const double th = a_;
      auto prim = [th](double x) { return -(x + th) * std::exp(-x / th); };
      const double upper = std::isinf(hi) ? 0.0 : prim(hi);
      return upper - prim(l);
    }
    case Kind::Uniform: {
      const double A = std::max(a_, lo), B = std::min(b_, hi);
      if (A >= B) return 0.0;
      return (B * B - A * A) / (2 * (b_ - a_));
    }
    case Kind::TwoPoint: {
      double s = 0;
      if (a_ > lo && a_ < hi) s += b_ * a_;
      if (c_ > lo && c_ < hi) s += (1 - b_) * c_;
      return s;
    }
    case Kind::Grid:
      return grid_integral([](double z) { return z; }, lo, hi);
  }
  return 0;
}

double JumpLaw::m2_below(double c) const {
  switch (kind_) {
    case Kind::Dirac: return a_ < c ? a_ * a_ : 0.0;
    case Kind::Normal: {
      const double al = (c - a_) / b_;
      return (a_ * a_ + b_ * b_) * normal_cdf(al) -
             b_ * (2 * a_ + b_ * al) * phi_pdf(al);
    }
    case Kind::Exponential: {
      if (c <= 0) return 0.0;
      const double th = a_;
      if (std::isinf(c)) return 2 * th * th;
      return 2 * th * th -
             std::exp(-c / th) * (c * c + 2 * c * th + 2 * th * th);
    }
    case Kind::Uniform: {
      const double B = std::min(b_, c);
      if (B <= a_) return 0.0;
      return (B * B * B - a_ * a_ * a_) / (3 * (b_ - a_));
    }
    case Kind::TwoPoint: {
      double s = 0;
      if (a_ < c) s += b_ * a_ * a_;
      if (c_ < c) s += (1 - b_) * c_ * c_;
      return s;
    }
    case Kind::Grid:
      return grid_integral([](double z) { return z * z; }, -kInf, c);
  }
  return 0;
}

double JumpLaw::dd_inside(double lo, double hi) const {
  auto f = [](double z) { return std::expm1(z) - z; };
  switch (kind_) {
    case Kind::Dirac: return (a_ > lo && a_ < hi) ? f(a_) : 0.0;
    case Kind::TwoPoint: {
      double s = 0;
      if (a_ > lo && a_ < hi) s += b_ * f(a_);
      if (c_ > lo && c_ < hi) s += (1 - b_) * f(c_);
      return s;
    }
    case Kind::Grid:
      return grid_integral(f, lo, hi);
    default: {
      const double A = std::max(min_support(), lo);
      const double B = std::min(max_support(), hi);
      if (A >= B) return 0.0;
      auto dens = [this](double z) {
        switch (kind_) {
          case Kind::Normal: return phi_pdf((z - a_) / b_) / b_;
          case Kind::Exponential: return z > 0 ? std::exp(-z / a_) / a_ : 0.0;
          case Kind::Uniform: return 1.0 / (b_ - a_);
          default: return 0.0;
        }
      };
      return adaptive_simpson([&](double z) { return f(z) * dens(z); }, A, B,
                              1e-12);
    }
  }
}

double JumpLaw::exp_minus_one_inside(double lo, double hi) const {
  // E[(e^Z - 1) 1] = E[(e^Z - 1 - Z) 1] + E[Z 1]
  return dd_inside(lo, hi) + mean_inside(lo, hi);
}

double JumpLaw::psi0_term(double l) const {
  if (l == 0) return 0.0;
  switch (kind_) {
    case Kind::Dirac:
      return std::expm1(-l * a_) + l * a_;
    case Kind::Exponential:
      // 1/(1+lm) - 1 + lm = (lm)^2 / (1+lm), exact
      return l * a_ * l * a_ / (1.0 + l * a_);
    case Kind::TwoPoint:
      return b_ * (std::expm1(-l * a_) + l * a_) +
             (1 - b_) * (std::expm1(-l * c_) + l * c_);
    case Kind::Grid:
      return grid_integral(
          [l](double z) { return std::expm1(-l * z) + l * z; }, -kInf, kInf);
    case Kind::Uniform:
    case Kind::Normal: {
      const double scale = std::max(std::abs(min_support()),
                                    std::abs(max_support()));
      if (std::isfinite(scale) && l * scale < 1e-4) {
        // series through the third moment; the tail is O((l scale)^4)
        const double m2 = second_moment();
        const double m3 = kind_ == Kind::Uniform
                              ? (std::pow(b_, 4) - std::pow(a_, 4)) / (4 * (b_ - a_))
                              : 0.0;
        return 0.5 * l * l * m2 - l * l * l * m3 / 6.0;
      }
      return mgf(-l) - 1.0 + l * mean();
    }
  }
  return 0;
}

double JumpLaw::psi0_term_prime(double l) const {
  if (l == 0) return 0.0;
  switch (kind_) {
    case Kind::Dirac:
      return -a_ * std::expm1(-l * a_);
    case Kind::Exponential: {
      const double u = l * a_;
      return a_ * u * (2.0 + u) / ((1.0 + u) * (1.0 + u));
    }
    case Kind::TwoPoint:
      return -b_ * a_ * std::expm1(-l * a_) -
             (1 - b_) * c_ * std::expm1(-l * c_);
    case Kind::Grid:
      return grid_integral(
          [l](double z) { return -z * std::expm1(-l * z); }, -kInf, kInf);
    case Kind::Uniform:
    case Kind::Normal: {
      const double scale = std::max(std::abs(min_support()),
                                    std::abs(max_support()));
      if (std::isfinite(scale) && l * scale < 1e-4) {
        const double m2 = second_moment();
        const double m3 = kind_ == Kind::Uniform
                              ? (std::pow(b_, 4) - std::pow(a_, 4)) / (4 * (b_ - a_))
                              : 0.0;
        return l * m2 - 0.5 * l * l * m3;
      }
      return mean() - mgf_prime(-l);
    }
  }
  return 0;
}

double JumpLaw::sample(Rng& rng) const {
  switch (kind_) {
    case Kind::Dirac: return a_;
    case Kind::Normal: return a_ + b_ * rng.normal();
    case Kind::Exponential: return rng.exponential(a_);
    case Kind::Uniform: return a_ + (b_ - a_) * rng.uniform();
    case Kind::TwoPoint: return rng.uniform() < b_ ? a_ : c_;
    case Kind::Grid: {
      const auto& g = *grid_;
      const double u = rng.uniform();
      const auto it = std::upper_bound(g.cum.begin(), g.cum.end(), u);
      std::size_t i = static_cast<std::size_t>(it - g.cum.begin());
      if (i == 0) return g.x.front();
      --i;
      if (i + 1 >= g.x.size()) return g.x.back();
      const double h = g.x[i + 1] - g.x[i];
      const double p0 = g.pdf[i], p1 = g.pdf[i + 1];
      const double r = u - g.cum[i];  // mass to place inside the cell
      // Solve h (p0 t + (p1-p0) t^2 / 2) = r for t in [0,1].
      const double A = 0.5 * (p1 - p0) * h;
      const double Bq = p0 * h;
      double t;
      if (std::abs(A) < 1e-300) {
        t = Bq > 0 ? r / Bq : 0.5;
      } else {
        const double disc = std::max(0.0, Bq * Bq + 4 * A * r);
        t = (-Bq + std::sqrt(disc)) / (2 * A);
      }
      t = std::clamp(t, 0.0, 1.0);
      return g.x[i] + t * h;
    }
  }
  return 0;
}

double JumpLaw::sample_tail(Rng& rng, double lo) const {
  switch (kind_) {
    case Kind::Dirac:
      if (a_ < lo) throw std::invalid_argument("sample_tail: empty tail");
      return a_;
    case Kind::Exponential:
      return std::max(lo, 0.0) + rng.exponential(a_);  // memoryless
    case Kind::Uniform: {
      const double A = std::max(a_, lo);
      if (A >= b_) throw std::invalid_argument("sample_tail: empty tail");
      return A + (b_ - A) * rng.uniform();
    }
    case Kind::TwoPoint: {
      const double pa = a_ >= lo ? b_ : 0.0;
      const double pc = c_ >= lo ? 1 - b_ : 0.0;
      if (pa + pc <= 0) throw std::invalid_argument("sample_tail: empty tail");
      return rng.uniform() * (pa + pc) < pa ? a_ : c_;
    }
    case Kind::Normal:
    case Kind::Grid: {
      const double p = tail(lo);
      if (!(p > 0)) throw std::invalid_argument("sample_tail: empty tail");
      // rejection against the unconditional sampler; fine for the moderate
      // truncations the simulator uses
      for (int i = 0; i < 100000; ++i) {
        const double z = sample(rng);
        if (z >= lo) return z;
      }
      throw std::runtime_error("sample_tail: rejection stalled");
    }
  }
  return 0;
}

TiltedLaw JumpLaw::tilt(double kappa) const {
  const double factor = mgf(-kappa);
  if (!std::isfinite(factor) || !(factor > 0)) {
    throw std::invalid_argument("tilt: e^{-kappa z} moment not finite");
  }
  switch (kind_) {
    case Kind::Dirac: return {dirac(a_), factor};
    case Kind::Normal: return {normal(a_ - kappa * b_ * b_, b_), factor};
    case Kind::Exponential: {
      // density e^{-kappa z} e^{-z/m}/m stays exponential
      const double m = a_ / (1.0 + kappa * a_);
      return {exponential(m), factor};
    }
    case Kind::TwoPoint: {
      const double wa = b_ * std::exp(-kappa * a_);
      const double wc = (1 - b_) * std::exp(-kappa * c_);
      return {two_point(a_, wa / (wa + wc), c_), factor};
    }
    case Kind::Uniform: {
      if (kappa == 0) return {*this, 1.0};
      double mass = 0;
      auto dens = [this, kappa](double z) {
        return std::exp(-kappa * z) / (b_ - a_);
      };
      JumpLaw law = from_density(dens, a_, b_, &mass);
      return {law, factor};
    }
    case Kind::Grid: {
      if (kappa == 0) return {*this, 1.0};
      const auto& g = *grid_;
      auto dens = [&g, kappa, this](double z) {
        // reuse the tabulated (normalized) density
        const double lo = g.x.front(), hi = g.x.back();
        if (z < lo || z > hi) return 0.0;
        const double h = (hi - lo) / (g.x.size() - 1);
        std::size_t i = std::min<std::size_t>(
            g.x.size() - 2, static_cast<std::size_t>((z - lo) / h));
        const double t = (z - g.x[i]) / h;
        return (g.pdf[i] * (1 - t) + g.pdf[i + 1] * t) * std::exp(-kappa * z);
      };
      double mass = 0;
      JumpLaw law = from_density(dens, g.x.front(), g.x.back(), &mass,
                                 static_cast<int>(g.x.size()) - 1);
      return {law, factor};
    }
  }
  throw std::logic_error("tilt: unreachable");
}

std::string JumpLaw::describe() const {
  char buf[96];
  switch (kind_) {
    case Kind::Dirac: std::snprintf(buf, sizeof buf, "dirac(%g)", a_); break;
    case Kind::Normal: std::snprintf(buf, sizeof buf, "normal(%g,%g)", a_, b_); break;
    case Kind::Exponential: std::snprintf(buf, sizeof buf, "exp(%g)", a_); break;
    case Kind::Uniform: std::snprintf(buf, sizeof buf, "uniform(%g,%g)", a_, b_); break;
    case Kind::TwoPoint:
      std::snprintf(buf, sizeof buf, "twopoint(%g,%g,%g)", a_, b_, c_);
      break;
    case Kind::Grid:
      std::snprintf(buf, sizeof buf, "density[%g,%g]", a_, b_);
      break;
  }
  return buf;
}

}  // namespace cblre
