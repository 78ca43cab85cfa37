#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace gue {

/// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Identifies one independent random stream: a run-wide master seed plus
/// the index of the task (usually one matrix) drawing from it.
struct SeedSpec {
  std::uint64_t master_seed = 0;
  std::uint64_t task_index = 0;

  friend bool operator==(const SeedSpec&, const SeedSpec&) = default;
};

/**
 * xoshiro256** seeded from a SeedSpec.
 *
 * Stream derivation: the first two state words are mix64 images of the
 * master seed and the task index under different offsets, so the map
 * (master_seed, task_index) -> state is injective. The remaining words
 * are filled from a SplitMix64 walk over their combination. The recipe
 * is fixed here so reruns agree across machines.
 */
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(SeedSpec seed) noexcept {
    constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ULL;
    state_[0] = mix64(seed.master_seed + golden);
    state_[1] = mix64(seed.task_index + 2 * golden);
    std::uint64_t walk = state_[0] ^ (state_[1] * 3);
    state_[2] = mix64(walk += golden);
    state_[3] = mix64(walk += golden) | 1;  // never all-zero
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in (0, 1], 53 bits.
  double uniform_open0() noexcept {
    return (static_cast<double>((*this)() >> 11) + 1.0) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

/// Standard normal draws by Box-Muller. std::normal_distribution is not
/// specified bit-for-bit across standard libraries, so we own the transform.
class NormalSource {
 public:
  explicit NormalSource(SeedSpec seed) noexcept : engine_(seed) {}

  double operator()() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double radius = std::sqrt(-2.0 * std::log(engine_.uniform_open0()));
    const double angle = 2.0 * std::numbers::pi * engine_.uniform_open0();
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

  Xoshiro256& engine() noexcept { return engine_; }

 private:
  Xoshiro256 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gue
