#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

// Counter-based random numbers: every draw is a pure function of
// (key, counter), so results do not depend on evaluation order or thread
// count.
namespace sstgnn::rng {

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t combine(std::uint64_t a, std::uint64_t b) noexcept { return mix64(a ^ mix64(b)); }

// FNV-1a; used to turn stream names into keys.
constexpr std::uint64_t hash_name(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// A named stream derived from a root seed.
class Stream {
 public:
  constexpr Stream(std::uint64_t seed, std::string_view name) noexcept : key_(combine(seed, hash_name(name))) {}
  constexpr explicit Stream(std::uint64_t key) noexcept : key_(key) {}

  constexpr Stream child(std::uint64_t index) const noexcept { return Stream(combine(key_, index)); }
  constexpr Stream child(std::string_view name) const noexcept { return Stream(combine(key_, hash_name(name))); }

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept { return combine(key_, counter); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }
  double uniform(std::uint64_t counter, double lo, double hi) const noexcept {
    return lo + (hi - lo) * uniform(counter);
  }
  // Standard normal via Box-Muller on counters 2c and 2c+1.
  double normal(std::uint64_t counter) const noexcept {
    const double u1 = 1.0 - uniform(2 * counter);  // (0, 1]
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t counter, std::uint64_t n) const noexcept {
    return n == 0 ? 0 : static_cast<std::uint64_t>(uniform(counter) * static_cast<double>(n));
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_;
};

}  // namespace sstgnn::rng
