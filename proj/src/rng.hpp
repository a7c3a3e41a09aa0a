#pragma once

#include <cstdint>
#include <random>

namespace qhuber {

// splitmix64 finalizer; spreads seed material before it reaches the engine.
std::uint64_t splitmix64(std::uint64_t z);

// Deterministic 64-bit generator with named substreams, so independent draws
// (noise, shuffles, repetitions) never share state by accident.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Substream k of a base seed; distinct k give decorrelated sequences.
  static Rng stream(std::uint64_t seed, std::uint64_t k);

  std::uint64_t next_u64();

  // Uniform on the open interval (0, 1); never returns an endpoint.
  double uniform01();

  // Standard normal via Box-Muller, one cached mate per pair.
  double normal();

  // Uniform integer in [0, n); n must be positive.
  std::uint64_t bounded(std::uint64_t n);

 private:
  std::mt19937_64 gen_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace qhuber
