#include "devharness/util/rng.hpp"

namespace devharness::util {

std::uint64_t DeterministicRng::next() {
  std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t DeterministicRng::next_below(std::uint64_t bound) {
  if (bound <= 1) return 0;
  // Rejection sampling over the largest multiple of bound.
  std::uint64_t limit = ~0ull - (~0ull % bound + 1) % bound;
  std::uint64_t v;
  do {
    v = next();
  } while (v > limit);
  return v % bound;
}

std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
  // FNV-1a over the label, folded into the base seed.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : label) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return base ^ h;
}

}  // namespace devharness::util
