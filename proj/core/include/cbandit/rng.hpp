#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace cbandit {

/// Seeded random stream. All randomness in the library flows through an
/// explicitly injected Rng, never through ambient global state; every
/// sampler is implemented here so draws are stable across standard-library
/// versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on {0, 1, ..., n-1}.
  int uniform_int(int n);

  /// Standard normal via the Marsaglia polar method (one spare cached).
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  /// Derived child seed for partitioned streams (splitmix64 chain).
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

  /// Engine + cache state as text, for checkpointing.
  std::string state() const;
  void set_state(const std::string& s);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace cbandit
