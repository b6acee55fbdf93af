#ifndef CONDQUANT_RNG_HPP
#define CONDQUANT_RNG_HPP

#include <cmath>
#include <cstdint>

namespace condquant {

// 64-bit finalizer from splitmix64 (Vigna / Steele-Lea-Flood).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Stream purpose labels; part of the substream key so that draws for
// different purposes never overlap even at equal (iteration, index).
enum class StreamTag : std::uint64_t {
  marginal_x = 1,
  conditional_y = 2,
  init = 3,
  descent = 4,
  eval = 5,
  generic = 6,
};

// Counter-keyed splitmix64 stream. A stream is fully determined by
// (seed, a, b, tag); consuming one stream never affects another, which
// keeps draw sequences identical across thread counts and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(mix64(seed)) {}

  static Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                       StreamTag tag) {
    std::uint64_t s = mix64(seed);
    s = mix64(s ^ (a * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL));
    s = mix64(s ^ (b * 0xc4ceb9fe1a85ec53ULL + 0x9e3779b97f4a7c15ULL));
    s = mix64(s ^ static_cast<std::uint64_t>(tag));
    Rng r(0);
    r.state_ = s;
    return r;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the transform is fixed so that draw
  // sequences are bit-reproducible across platforms.
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = 1.0 - next_double();  // in (0, 1]
    double u2 = next_double();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 6.283185307179586476925286766559 * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace condquant

#endif  // CONDQUANT_RNG_HPP
