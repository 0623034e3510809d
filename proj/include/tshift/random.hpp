#pragma once

#include <cstdint>
#include <random>

namespace tshift {

// Deterministic RNG used for sampled verification and estimators.  Draws are
// derived from raw mt19937_64 output so results do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  std::int64_t uniform_int(std::int64_t a, std::int64_t b) {
    // inclusive bounds; modulo bias is irrelevant for sampling duty
    const auto span = static_cast<std::uint64_t>(b - a) + 1;
    return a + static_cast<std::int64_t>(gen_() % span);
  }

 private:
  std::mt19937_64 gen_;
};

inline constexpr std::uint64_t kDefaultSeed = 0x7361'6d70'6c65ULL;

}  // namespace tshift
