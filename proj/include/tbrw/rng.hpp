#pragma once

#include <array>
#include <cstdint>

namespace tbrw {

/// splitmix64 finalizer. Used both as a seed expander and as the keyed
/// mixing step behind random-access draws.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ull;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBull;
  x ^= x >> 31;
  return x;
}

constexpr std::uint64_t mix64(std::uint64_t a, std::uint64_t b) {
  return mix64(a + 0x9E3779B97F4A7C15ull * (b + 0x632BE59BD9B4E019ull));
}

/// xoshiro256++ with a splitmix64-expanded seed. The engine and every
/// sampler below are fully specified here, so a (key, call sequence) pair
/// produces the same values on every build. std::uniform_* and friends are
/// implementation-defined and must not be used anywhere in the library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
      sm += 0x9E3779B97F4A7C15ull;
      word = mix64(sm);
    }
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform integer in [0, bound), bound >= 1. Lemire's multiply-shift with
  /// rejection, so the result is exactly uniform.
  std::uint64_t below(std::uint64_t bound) {
    unsigned __int128 m = static_cast<unsigned __int128>(next()) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      const std::uint64_t threshold = (0 - bound) % bound;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(next()) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform double in [0, 1), 53 bits.
  double u01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1); never returns 0 (safe for inversions).
  double u01_open() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

  bool bernoulli(double p) { return u01() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> state_;
};

/// A keyed random stream. `sequence()` gives the stream's sequential engine;
/// `at(i)` gives an engine that is a pure function of (key, i), so draws at
/// distinct indices are independent and invariant under call order, host and
/// scheduling. Replica streams derive from (seed, replica_index); lanes split
/// a replica stream into independent substreams (environment draws, walk
/// choices, ...).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t key) : key_(key) {}

  static RandomStream for_replica(std::uint64_t seed, std::uint64_t replica) {
    return RandomStream(mix64(mix64(seed), replica));
  }

  RandomStream derive(std::uint64_t lane) const {
    return RandomStream(mix64(key_ ^ 0xA5A5A5A5A5A5A5A5ull, lane));
  }

  Rng sequence() const { return Rng(key_); }

  Rng at(std::uint64_t index) const { return Rng(mix64(key_, index)); }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

inline constexpr std::uint64_t kEnvLane = 1;
inline constexpr std::uint64_t kWalkLane = 2;

}  // namespace tbrw
