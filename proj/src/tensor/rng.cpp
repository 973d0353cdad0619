#include "gpr/tensor/rng.hpp"

namespace gpr {

std::uint64_t Rng::mix(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view key, std::uint64_t salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ Rng::mix(salt);
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Rng::mix(h);
}

double stable_uniform(std::string_view key, std::uint64_t salt) {
  return static_cast<double>(stable_hash(key, salt) >> 11) * 0x1.0p-53;
}

}  // namespace gpr
