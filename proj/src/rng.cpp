#include "amscale/rng.hpp"

#include <array>
#include <cmath>
#include <numbers>

namespace amscale {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Minimal SeedSequence that feeds SplitMix64 words to the engine.
class SplitMixSeq {
 public:
  using result_type = std::uint32_t;
  explicit SplitMixSeq(std::uint64_t seed) : state_(seed) {}

  template <typename It>
  void generate(It first, It last) {
    for (; first != last; ++first) {
      *first = static_cast<result_type>(splitmix64(state_) >> 32);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace

Rng::Rng(std::uint64_t seed) {
  SplitMixSeq seq(seed);
  engine_.seed(seq);
}

double Rng::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal(double mean, double sd) {
  if (has_spare_) {
    has_spare_ = false;
    return mean + sd * spare_;
  }
  double u1 = uniform01();
  while (u1 <= 0.0) u1 = uniform01();
  const double u2 = uniform01();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return mean + sd * radius * std::cos(angle);
}

std::uint64_t Rng::index(std::uint64_t n) {
  auto k = static_cast<std::uint64_t>(uniform01() * static_cast<double>(n));
  return k < n ? k : n - 1;
}

}  // namespace amscale
