#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

namespace changeband::rng {

// splitmix64 finalizer.  Used to derive statistically independent child seeds
// from (base seed, context words) so that every bootstrap replicate owns its
// own stream and results do not depend on scheduling or thread count.
inline std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
  std::uint64_t s = mix(base);
  for (std::uint64_t w : words) s = mix(s ^ w);
  return s;
}

// Stream tags keeping the seed derivations of nested resampling layers apart.
namespace stream {
inline constexpr std::uint64_t first_level = 0xb001;
inline constexpr std::uint64_t second_level = 0xb002;
inline constexpr std::uint64_t ci_outer = 0xb003;
inline constexpr std::uint64_t ci_band = 0xb004;
inline constexpr std::uint64_t sim_data = 0x51d0;
inline constexpr std::uint64_t sim_band = 0x51d1;
inline constexpr std::uint64_t group_a = 0xa0;
inline constexpr std::uint64_t group_b = 0xa1;
inline constexpr std::uint64_t batch = 0xba7c;
}  // namespace stream

// N(0,1) stream: mt19937_64 + Box-Muller.  std::normal_distribution is
// implementation-defined, so identical seeds could give different datasets on
// different standard libraries; this generator is pinned bit for bit.
class gaussian_stream {
 public:
  explicit gaussian_stream(std::uint64_t seed) : engine_(seed) {}

  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1], u2 in [0, 1): 53-bit mantissas from the top engine bits.
    const double u1 = (static_cast<double>(engine_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace changeband::rng
