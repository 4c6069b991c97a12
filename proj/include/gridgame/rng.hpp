#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace gridgame {

/// Deterministic random stream. Engine is std::mt19937_64 (output fully
/// specified by the standard); distributions are implemented here so the
/// stream is identical across standard libraries.
class Rng {
public:
  static constexpr std::string_view kName = "mt19937_64/splitmix-v1";

  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  /// Child stream for (this seed, stream index). Parent state is untouched.
  static Rng derive(std::uint64_t seed, std::uint64_t stream) {
    return Rng(mix(seed ^ mix(stream + 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n); n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Poisson(mean) by sequential inversion; split into chunks of 500 to
  /// avoid exp underflow for large means.
  std::uint64_t poisson(double mean) {
    std::uint64_t total = 0;
    while (mean > 500.0) {
      total += poisson_small(500.0);
      mean -= 500.0;
    }
    return total + poisson_small(mean);
  }

private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t poisson_small(double mean) {
    if (mean <= 0.0) return 0;
    double p = std::exp(-mean);
    double cdf = p;
    const double u = uniform();
    std::uint64_t k = 0;
    while (u >= cdf && p > 0.0) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
    }
    return k;
  }

  std::mt19937_64 engine_;
};

}  // namespace gridgame
