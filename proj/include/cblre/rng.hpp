#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cblre {

// splitmix64 step; also used as the mixing function for stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a substream key from (master seed, module tag, index pair).
// Every random draw in the toolkit comes from a stream keyed this way, so
// results do not depend on thread scheduling.
inline std::uint64_t stream_key(std::uint64_t master, std::uint64_t tag,
                                std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = master;
  std::uint64_t k = splitmix64(s);
  s = k ^ (0x100000001b3ULL * tag);
  k = splitmix64(s);
  s = k ^ (0x100000001b3ULL * a);
  k = splitmix64(s);
  s = k ^ (0x100000001b3ULL * b);
  return splitmix64(s);
}

namespace stream_tag {
// One tag per independent consumer of randomness.
inline constexpr std::uint64_t env_path = 0x01;
inline constexpr std::uint64_t branching = 0x02;
inline constexpr std::uint64_t immigration = 0x03;
inline constexpr std::uint64_t passage_formula = 0x04;
inline constexpr std::uint64_t passage_direct = 0x05;
inline constexpr std::uint64_t neveu = 0x06;
inline constexpr std::uint64_t generic_mc = 0x07;
}  // namespace stream_tag

// xoshiro256++ with hand-rolled samplers. The standard library's
// distributions are implementation-defined, which would break the
// byte-identical reproducibility contract of the experiment driver.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  std::uint64_t next_u64() {
    const std::uint64_t x = state_[0] + state_[3];
    const std::uint64_t result = ((x << 23) | (x >> 41)) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = (state_[3] << 45) | (state_[3] >> 19);
    return result;
  }

  // Uniform on [0,1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); safe as a log/inverse-cdf argument.
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Standard normal, Marsaglia polar method with one cached spare.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  double exponential(double mean) { return -mean * std::log(uniform_pos()); }

  // Poisson: sequential inversion for small means, Hoermann's PTRD
  // transformed rejection for large ones, normal approximation past the
  // point where doubles cannot resolve unit steps anyway.
  long long poisson(double mean);

 private:
  std::array<std::uint64_t, 4> state_{};
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Rng make_stream(std::uint64_t master, std::uint64_t tag,
                       std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(stream_key(master, tag, a, b));
}

}  // namespace cblre
