#include "markovcount/rng.hpp"

#include <cmath>

namespace markovcount {
namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

// SplitMix64: expands one 64-bit value into a well-mixed stream, used only
// for state initialization.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
};

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
  SplitMix64 mix{seed ^ ((stream + 1) * 0x9E3779B97F4A7C15ULL)};
  for (auto& word : s_) word = mix.next();
  // All-zero state is invalid for xoshiro; SplitMix64 cannot emit four
  // consecutive zeros, but guard anyway.
  if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
}

std::uint64_t Rng::next_u64() {
  // xoshiro256**
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double rate) {
  // Inversion on 1 - u keeps the draw finite (u < 1 always).
  return -std::log1p(-uniform()) / rate;
}

std::uint64_t Rng::uniform_int(std::uint64_t bound) {
  if (bound < 2) return 0;
  std::uint64_t mask = bound - 1;
  mask |= mask >> 1;
  mask |= mask >> 2;
  mask |= mask >> 4;
  mask |= mask >> 8;
  mask |= mask >> 16;
  mask |= mask >> 32;
  for (;;) {
    const std::uint64_t draw = next_u64() & mask;
    if (draw < bound) return draw;
  }
}

}  // namespace markovcount
