#include "cblre/mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <thread>

namespace cblre {

double Accumulator::variance() const {
  if (n_ < 2) throw std::invalid_argument("variance needs n >= 2");
  return m2_ / static_cast<double>(n_ - 1);
}

MCEstimate Accumulator::estimate() const {
  if (n_ < 2) throw std::invalid_argument("estimate needs n >= 2");
  MCEstimate e;
  e.mean = mean_;
  e.n = n_;
  e.se = std::sqrt(variance() / static_cast<double>(n_));
  return e;
}

Accumulator Accumulator::from_estimate(const MCEstimate& e) {
  Accumulator a;
  a.n_ = e.n;
  a.mean_ = e.mean;
  a.m2_ = e.se * e.se * static_cast<double>(e.n) *
          static_cast<double>(e.n - 1);
  return a;
}

MCEstimate stream_accumulate(std::span<const double> values) {
  if (values.size() < 2) {
    throw std::invalid_argument("stream_accumulate needs n >= 2");
  }
  Accumulator a;
  for (double v : values) a.add(v);
  return a.estimate();
}

PooledConditional pooled_conditional(std::span<const MCEstimate> per_env) {
  if (per_env.size() < 2) {
    throw std::invalid_argument("pooled_conditional needs >= 2 environments");
  }
  Accumulator flat;
  for (const auto& e : per_env) flat.merge(Accumulator::from_estimate(e));

  const double m = static_cast<double>(per_env.size());
  double grand = 0.0;
  double within = 0.0;
  for (const auto& e : per_env) {
    grand += e.mean / m;
    within += e.se * e.se * static_cast<double>(e.n) / m;
  }
  double between = 0.0;
  for (const auto& e : per_env) {
    between += (e.mean - grand) * (e.mean - grand) / m;
  }

  PooledConditional out;
  out.pooled = flat.estimate();
  out.between_var = between;
  out.within_var = within;
  return out;
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CBLRE_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                  int threads) {
  threads = resolve_threads(threads);
  if (n <= 0) return;
  if (threads <= 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (;;) {
      const std::int64_t i = next.fetch_add(1);
      if (i >= n || failed.load()) return;
      try {
        fn(i);
      } catch (...) {
        if (!failed.exchange(true)) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  const int k = static_cast<int>(std::min<std::int64_t>(threads, n));
  pool.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (failed.load() && err) std::rethrow_exception(err);
}

}  // namespace cblre
