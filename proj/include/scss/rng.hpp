#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

namespace scss {

/// Name recorded in output metadata alongside every randomized artifact.
inline constexpr const char* kRngAlgorithm = "mt19937_64/splitmix64-substreams";

/// SplitMix64 step; used to derive well-separated per-stream seeds.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic random stream: stream index selects a substream of the
/// master seed, so chunked Monte-Carlo runs are reproducible for any worker
/// count. Doubles are built from raw bits (no std::uniform_real_distribution,
/// whose output is implementation-defined).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t s = seed ^ (0xd1b54a32d192ed03ULL * (stream + 1));
    // a short splitmix warmup decorrelates nearby (seed, stream) pairs
    std::uint64_t s0 = splitmix64(s);
    std::uint64_t s1 = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(s0), static_cast<std::uint32_t>(s0 >> 32),
                      static_cast<std::uint32_t>(s1), static_cast<std::uint32_t>(s1 >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on the open interval (0, 1); never returns 0 or 1.
  double uniform_open01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(next_u64() >> 11) * 0x1.0p-53);
  }

  /// Zero-mean Laplace with scale b (variance 2*b^2), via inverse CDF.
  double laplace(double b) {
    const double u = uniform_open01() - 0.5;
    return u >= 0 ? -b * std::log1p(-2.0 * u) : b * std::log1p(2.0 * u);
  }

 private:
  std::mt19937_64 engine_;
};

/// Scale giving a unit-variance Laplace (b = 1/sqrt(2)).
inline constexpr double kUnitLaplaceScale = 0.70710678118654752440;

/// Derives an independent seed for a named sub-purpose of a master seed, so
/// distinct pipeline stages never share substreams.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  std::uint64_t s = seed ^ (0x9e3779b97f4a7c15ULL * (tag + 0x51ULL));
  splitmix64(s);
  return splitmix64(s);
}

/// Runs `total` trials split into fixed-size chunks, each with its own
/// substream, and merges accumulators in chunk order. The result is
/// bit-identical for any worker count.
///
/// PerChunk: Acc(std::uint64_t chunk_index, RandomStream&, std::uint64_t n)
/// Merge:    void(Acc& into, Acc&& part)
template <typename Acc, typename PerChunk, typename Merge>
Acc chunked_mc(std::uint64_t total, std::uint64_t chunk_size, unsigned workers,
               std::uint64_t seed, PerChunk per_chunk, Merge merge, Acc init = Acc{}) {
  if (chunk_size == 0) chunk_size = 1;
  const std::uint64_t n_chunks = (total + chunk_size - 1) / chunk_size;
  if (workers == 0) workers = 1;

  std::vector<Acc> parts(static_cast<std::size_t>(n_chunks));
  std::atomic<std::uint64_t> next{0};
  auto work = [&]() {
    for (;;) {
      const std::uint64_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      const std::uint64_t n =
          (c + 1 == n_chunks) ? total - c * chunk_size : chunk_size;
      RandomStream rng(seed, c);
      parts[static_cast<std::size_t>(c)] = per_chunk(c, rng, n);
    }
  };
  if (workers == 1 || n_chunks == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    const unsigned n_threads = static_cast<unsigned>(
        std::min<std::uint64_t>(workers, n_chunks));
    pool.reserve(n_threads);
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  Acc acc = std::move(init);
  for (auto& p : parts) merge(acc, std::move(p));
  return acc;
}

/// Default Monte-Carlo chunk size; fixed so results do not depend on the
/// worker count.
inline constexpr std::uint64_t kMcChunk = 1u << 16;

/// Compensated (Kahan) accumulator for order-insensitive sums.
class KahanSum {
 public:
  void add(double x) {
    const double y = x - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace scss
