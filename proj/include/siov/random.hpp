#pragma once

/// Seeded random streams for the simulator.
///
/// All conversions from raw engine output to integers and reals are done
/// here rather than with <random> distributions, whose outputs differ
/// between standard library implementations. Given a seed, every stream
/// produces the same values on every platform.

#include <concepts>
#include <cstdint>
#include <random>

namespace siov {

/// Anything the model can draw from. Tests substitute degenerate sources.
template <class R>
concept RandomSource = requires(R& r, std::uint64_t n) {
  { r.uniform01() } -> std::same_as<double>;
  { r.below(n) } -> std::same_as<std::uint64_t>;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Seed of run `run_index` derived from a master seed. Depends only on the
/// pair, so runs may execute in any order or in parallel.
constexpr std::uint64_t split_seed(std::uint64_t master,
                                   std::uint64_t run_index) noexcept {
  return mix64(mix64(master) ^ (run_index * 0xD1B54A32D192ED03ULL + 1));
}

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Unbiased uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform integer on the closed range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(
                    below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  std::mt19937_64 engine_;
};

static_assert(RandomSource<Rng>);

template <RandomSource R>
double uniform_real(R& rng, double lo, double hi) {
  return lo + (hi - lo) * rng.uniform01();
}

template <RandomSource R>
std::int64_t uniform_int(R& rng, std::int64_t lo, std::int64_t hi) {
  return lo + static_cast<std::int64_t>(
                  rng.below(static_cast<std::uint64_t>(hi - lo) + 1));
}

}  // namespace siov
