#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace devharness::util {

// Deterministic PRNG with a stable cross-platform contract.
// splitmix64; std::shuffle / distributions are implementation-defined
// and would break seed reproducibility across standard libraries.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  // Uniform in [0, bound) without modulo bias.
  std::uint64_t next_below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

// Stable seed derivation for independent substreams (e.g. per quarter).
std::uint64_t derive_seed(std::uint64_t base, std::string_view label);

}  // namespace devharness::util
