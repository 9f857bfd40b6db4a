#pragma once

#include <cstdint>
#include <string_view>

namespace silicon {

/// 64-bit FNV-1a over raw bytes.
inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// SplitMix64 output function (Steele, Lea & Flood's finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

/// Deterministic seed derivation. Streams are reproducible from the chain of
/// mixed values alone:
///
///   seed = mix64(root ^ C) then for each component x: seed = mix64(seed ^ x),
///   strings contributing fnv1a64(utf8 bytes), C = 0x53494c49434f4e31.
///
/// Changing any component changes the result with overwhelming probability.
class SeedChain {
 public:
  explicit SeedChain(std::uint64_t root) : state_(mix64(root ^ kDomainTag)) {}

  SeedChain& mix(std::uint64_t value) {
    state_ = mix64(state_ ^ value);
    return *this;
  }

  SeedChain& mix(std::string_view text) { return mix(fnv1a64(text)); }

  std::uint64_t value() const { return state_; }

 private:
  static constexpr std::uint64_t kDomainTag = 0x53494c49434f4e31ull;

  std::uint64_t state_;
};

/// Counter-free SplitMix64 generator; one independent instance per sub-seed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound) via the multiply-shift reduction.
  std::uint64_t next_below(std::uint64_t bound) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

 private:
  std::uint64_t state_;
};

}  // namespace silicon
