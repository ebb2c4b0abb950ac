#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace synthvox {

// std::mt19937_64 sequences are pinned by the standard, so seeds reproduce
// bit-identically across compilers. The std:: distributions are not, which is
// why the draws below are hand-rolled.
using RngEngine = std::mt19937_64;

/// Uniform draw in [0, 1) with 53 bits of mantissa.
inline double uniform01(RngEngine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

inline double uniform(RngEngine& eng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(eng);
}

/// Unbiased integer draw in [lo, hi] (inclusive), Lemire's method.
inline std::int64_t uniform_int(RngEngine& eng, std::int64_t lo, std::int64_t hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
  if (span == 0) return static_cast<std::int64_t>(eng()); // full 64-bit range
  const std::uint64_t threshold = (0 - span) % span; // 2^64 mod span
  for (;;) {
    const unsigned __int128 m = static_cast<unsigned __int128>(eng()) * span;
    if (static_cast<std::uint64_t>(m) >= threshold) {
      return lo + static_cast<std::int64_t>(m >> 64);
    }
  }
}

/// Standard-normal draws via Box-Muller; caches the spare value.
class NormalSampler {
public:
  double operator()(RngEngine& eng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(eng);
    const double u2 = uniform01(eng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline double normal(RngEngine& eng, double mean, double stddev) {
  NormalSampler n;
  return mean + stddev * n(eng);
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Stable seed derivation: independent streams per (base, tag[, index]).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  return splitmix64(base ^ fnv1a64(tag));
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index) {
  return splitmix64(derive_seed(base, tag) ^ splitmix64(index));
}

} // namespace synthvox
