#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace coarseop {

// splitmix64; used both as a mixer and to seed per-component streams.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derive a named stream seed from a master seed. All randomness in the
// library flows through these streams; there is no global RNG.
inline uint64_t stream_seed(uint64_t master, std::string_view name) {
  uint64_t h = 0xcbf29ce484222325ULL ^ master;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t next_u64() { return eng_(); }

  // uniform in [0, 1); bit-stable across platforms
  double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  // uniform in {0, ..., n-1}
  uint64_t next_below(uint64_t n) { return eng_() % n; }

  bool bernoulli(double prob) { return next_double() < prob; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace coarseop
