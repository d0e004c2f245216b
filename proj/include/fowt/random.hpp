#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fowt {

/// SplitMix64 step; used to spread a master seed into independent streams.
inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text, std::uint64_t h = 0xCBF29CE484222325ULL)
{
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Per-component seed: splitmix64(master ^ fnv1a(tag)). Stable across platforms.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag)
{
  return splitmix64(master ^ fnv1a(tag));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
  return splitmix64(master + 0x632BE59BD9B4E019ULL * (index + 1));
}

/// mt19937_64 with hand-rolled uniform/normal transforms so that draws are
/// identical on every standard library (std::normal_distribution is not).
class Rng
{
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (the spare value is cached).
  double normal();

  std::uint64_t next() { return engine_(); }

private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

} // namespace fowt
