#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cblre {

struct MCEstimate {
  double mean = 0.0;
  double se = 0.0;
  long long n = 0;
  double ci95_lo() const { return mean - 1.96 * se; }
  double ci95_hi() const { return mean + 1.96 * se; }
};

// One-pass mean/variance with Welford updates; merge uses the Chan
// pairwise formula so per-thread accumulators combine exactly.
class Accumulator {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }

  void merge(const Accumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
      *this = o;
      return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double d = o.mean_ - mean_;
    mean_ += d * nb / (na + nb);
    m2_ += o.m2_ + d * d * na * nb / (na + nb);
    n_ += o.n_;
  }

  long long count() const { return n_; }
  double mean() const { return mean_; }
  // Sample variance (n-1 denominator).
  double variance() const;
  MCEstimate estimate() const;

  // Rebuild an accumulator from a published estimate (se = sd/sqrt(n)).
  static Accumulator from_estimate(const MCEstimate& e);

 private:
  long long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

MCEstimate stream_accumulate(std::span<const double> values);

// Law-of-total-variance pooling of conditional (per-environment) estimates.
// `pooled` reproduces the flat single-pass estimate over all underlying
// draws; between/within report the variance decomposition (population
// convention, equal environment weights).
struct PooledConditional {
  MCEstimate pooled;
  double between_var = 0.0;
  double within_var = 0.0;
};

PooledConditional pooled_conditional(std::span<const MCEstimate> per_env);

// Thread count resolution: explicit argument > CBLRE_THREADS > hardware.
int resolve_threads(int requested = 0);

// Runs fn(i) for i in [0,n) on up to `threads` workers. Work items must be
// independent; determinism comes from indexing, not scheduling.
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  int threads);

}  // namespace cblre
