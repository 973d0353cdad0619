#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gpr {

/// Seedable 64-bit generator. Independent streams are derived from one run
/// seed through fixed offsets, so every component is reproducible from a
/// single number.
class Rng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(mix(seed)) {}

  /// Stream `offset` of the generator seeded with `seed()`.
  Rng stream(std::uint64_t offset) const { return Rng(mix(seed_ ^ mix(offset + 0x9e3779b97f4a7c15ULL))); }

  std::uint64_t seed() const { return seed_; }

  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  bool bernoulli(double p) { return uniform() < p; }

  static std::uint64_t mix(std::uint64_t x);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Fixed stream offsets, one per consumer.
namespace rng_stream {
inline constexpr std::uint64_t kInit = 1;
inline constexpr std::uint64_t kShuffle = 2;
inline constexpr std::uint64_t kDropout = 3;
inline constexpr std::uint64_t kData = 4;
inline constexpr std::uint64_t kEvidence = 5;
inline constexpr std::uint64_t kFolds = 6;
}  // namespace rng_stream

/// Deterministic 64-bit hash of a string, salted; used where a decision must
/// be a pure function of (key, seed).
std::uint64_t stable_hash(std::string_view key, std::uint64_t salt = 0);

/// Uniform value in [0,1) derived from `stable_hash(key, salt)`.
double stable_uniform(std::string_view key, std::uint64_t salt = 0);

}  // namespace gpr
