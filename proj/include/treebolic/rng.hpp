#pragma once

#include <cmath>
#include <cstdint>

namespace treebolic {

/// Counter-based random stream. Every draw is a pure function of the stream
/// key (derived from seed and replica) and a running counter, so replica
/// streams are mutually independent and reproduce bit-identically under any
/// parallel schedule.
class CounterRng {
 public:
  CounterRng() : CounterRng(0, 0) {}
  CounterRng(std::uint64_t seed, std::uint64_t replica) {
    key_ = mix(mix(seed + kGamma) ^ mix(replica * 0xD1B54A32D192ED03ull + 0x2545F4914F6CDD1Dull));
  }

  std::uint64_t next_u64() {
    counter_ += 1;
    return mix(key_ + kGamma * counter_);
  }

  /// Uniform in (0, 1]; never returns 0, so logs are safe.
  double uniform() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal. Box-Muller pair; the second value is cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * 3.14159265358979323846 * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, n).
  int uniform_int(int n) {
    const int k = static_cast<int>(uniform() * static_cast<double>(n));
    return k < n ? k : n - 1;
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace treebolic
