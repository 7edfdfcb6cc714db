#pragma once

#include <cstdint>
#include <random>

namespace amscale {

// Seeded generator for simulations and resampling.
//
// Bits come from std::mt19937_64, whose output sequence is fixed by the
// standard. Its state is filled from the 64-bit seed with SplitMix64. The
// distributions below are implemented here rather than taken from <random>
// because the standard leaves their algorithms unspecified, and streams must
// match across standard libraries:
//   uniform01  - top 53 bits scaled to [0, 1)
//   normal     - Box-Muller, both variates used in turn
//   index(n)   - floor(uniform01 * n)
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Generator for replicate r of an experiment seeded with `seed`.
  static Rng for_replicate(std::uint64_t seed, std::uint64_t replicate) {
    return Rng(seed ^ replicate);
  }

  std::uint64_t next_u64() { return engine_(); }
  double uniform01();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
  double normal(double mean = 0.0, double sd = 1.0);
  std::uint64_t index(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace amscale
