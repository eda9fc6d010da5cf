#pragma once

// Counter-based random streams.
//
// Every random quantity in a simulation is addressed by a key path such as
// (root seed, replica, time, receiver, sender). A key is folded into a
// 64-bit state with the splitmix64 finalizer, and values are read off that
// state by counter. Nothing is sequential, so results do not depend on the
// order in which replicas, times or edges are visited.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace conslab {

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace detail

// Purpose tags keep independent uses of the same (replica, time) apart.
enum class StreamTag : std::uint64_t {
  replica = 0x11,
  edge_noise = 0x22,
  topology = 0x33,
  reception = 0x44,
  quantization = 0x55,
  reception_noise = 0x66,
  test_case = 0x77,
  sweep_point = 0x88,
};

class StreamKey {
 public:
  constexpr StreamKey() = default;
  constexpr explicit StreamKey(std::uint64_t seed) noexcept
      : state_(detail::splitmix64(seed ^ 0xA0761D6478BD642FULL)) {}

  [[nodiscard]] constexpr StreamKey derive(std::uint64_t component) const noexcept {
    StreamKey k;
    k.state_ = detail::splitmix64(state_ ^ detail::splitmix64(component + 0x2545F4914F6CDD1DULL));
    return k;
  }
  [[nodiscard]] constexpr StreamKey derive(StreamTag tag) const noexcept {
    return derive(static_cast<std::uint64_t>(tag));
  }
  [[nodiscard]] constexpr StreamKey derive_signed(std::int64_t component) const noexcept {
    return derive(static_cast<std::uint64_t>(component));
  }

  [[nodiscard]] constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return detail::splitmix64(state_ + (counter + 1) * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform on [0, 1) with 53 random bits.
  [[nodiscard]] double uniform(std::uint64_t counter = 0) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  // Standard normal by Box-Muller on counters (2c, 2c+1).
  [[nodiscard]] double normal(std::uint64_t counter = 0) const noexcept {
    const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] constexpr std::uint64_t raw() const noexcept { return state_; }

 private:
  std::uint64_t state_ = 0;
};

// Sequential engine for places that need many draws from one key (random
// permutations, test-case generators). Satisfies UniformRandomBitGenerator.
class StreamEngine {
 public:
  using result_type = std::uint64_t;

  explicit StreamEngine(StreamKey key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return key_.bits(counter_++); }

  double uniform() noexcept { return key_.uniform(counter_++); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept { return key_.normal(counter_++); }

  // Uniform integer in [lo, hi].
  std::int64_t integer(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>((*this)() % span);
  }

 private:
  StreamKey key_;
  std::uint64_t counter_ = 0;
};

}  // namespace conslab
