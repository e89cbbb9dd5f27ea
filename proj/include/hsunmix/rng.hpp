#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace hsu {

/// Deterministic PRNG used everywhere randomness is needed. The transforms
/// from raw 64-bit draws to doubles are hand-rolled so a given seed produces
/// the same stream independent of the standard library's distribution
/// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, n), n >= 1.
  int uniform_int(int n) {
    const std::uint64_t un = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    std::uint64_t x;
    do {
      x = raw();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  /// Standard normal via Box-Muller; one spare value is cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// FNV-1a over a byte.
inline std::uint64_t fnv1a_byte(std::uint64_t h, unsigned char b) {
  return (h ^ b) * 0x100000001b3ULL;
}

inline std::uint64_t fnv1a_bytes(std::uint64_t h, const void* data, std::size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) h = fnv1a_byte(h, p[i]);
  return h;
}

/// Sub-seed derivation for Monte-Carlo cells: chains the master seed, a tag
/// (e.g. the algorithm name), and two indices (e.g. SNR in milli-dB and run
/// index) through FNV-1a. Documented so runs can be reproduced externally.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a_bytes(h, &master, sizeof(master));
  h = fnv1a_bytes(h, tag.data(), tag.size());
  h = fnv1a_bytes(h, &a, sizeof(a));
  h = fnv1a_bytes(h, &b, sizeof(b));
  return h;
}

}  // namespace hsu
