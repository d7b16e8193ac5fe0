#pragma once

#include <cmath>
#include <cstdint>

namespace gcg {

// splitmix64 finalizer. Good avalanche, cheap, and stateless.
inline std::uint64_t hash64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Counter-based uniform stream keyed by (seed, a, b, c). Draws with different
// keys are independent regardless of evaluation order or interleaving, which
// keeps simulations reproducible when loops are reordered.
inline std::uint64_t counter_bits(std::uint64_t seed, std::uint64_t a,
                                  std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = hash64(seed);
  h = hash64(h ^ a);
  h = hash64(h ^ b);
  return hash64(h ^ c);
}

// Uniform on the open interval (0,1); never returns an exact endpoint.
inline double counter_u01(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                          std::uint64_t c) {
  return (static_cast<double>(counter_bits(seed, a, b, c) >> 11) + 0.5) *
         0x1.0p-53;
}

// Small sequential generator for MCMC chains. splitmix64 stream plus
// Box-Muller normals, independent of any platform distribution code so
// chains are bit-reproducible.
class SeqRng {
 public:
  explicit SeqRng(std::uint64_t seed) : state_(hash64(seed ^ 0x5bf0f5e4c3a2d1ULL)) {}

  std::uint64_t next_bits() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double u01() { return (static_cast<double>(next_bits() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = u01();
    double u2 = u01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace gcg
