#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>

namespace epso {

// Draw source for the stochastic update rules. Anything that provides these
// three members can stand in for RandomSource (tests use fixed-value stubs).
template <typename R>
concept UnitRandom = requires(R& r, std::size_t n) {
  { r.uniform01() } -> std::convertible_to<double>;
  { r.uniform_signed() } -> std::convertible_to<double>;
  { r.below(n) } -> std::convertible_to<std::size_t>;
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic draw stream identified by (master seed, stream index).
///
/// Distinct stream indices give statistically independent sequences, so a
/// particle that owns stream i sees the same draws no matter how the work of
/// other particles is scheduled.
class RandomSource {
 public:
  RandomSource(std::uint64_t master_seed, std::uint64_t stream)
      : master_seed_(master_seed), stream_(stream) {
    std::uint64_t state = master_seed;
    const std::uint64_t a = detail::splitmix64(state);
    state = a ^ (stream * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(detail::splitmix64(state)),
                      static_cast<std::uint32_t>(detail::splitmix64(state)),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1), 53 bits of resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform on [-1, 1).
  double uniform_signed() { return 2.0 * uniform01() - 1.0; }

  double uniform(double low, double high) { return low + (high - low) * uniform01(); }

  // Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::size_t below(std::size_t n) {
    if (n <= 1) return 0;
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  // Standard normal via Box-Muller. One value per call; the pair's twin is dropped.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

static_assert(UnitRandom<RandomSource>);

}  // namespace epso
