#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace agentforge {

// Deterministic random stream with named child derivation.
//
// The pipeline's reproducibility contract requires that per-seed randomness
// is a pure function of (run seed, seed id), independent of worker count and
// scheduling. std::mt19937 + std::uniform_int_distribution are not portable
// bit-for-bit across standard library implementations, so the generator and
// the bounded sampling are spelled out here (splitmix64 core).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  // Derives an independent stream for a named unit of work. Children with
  // distinct keys are decorrelated; the parent state is not advanced.
  RandomStream child(std::string_view key) const;

  std::uint64_t next_u64();

  // Uniform in [0, n). n must be > 0. Uses rejection sampling so every
  // index is exactly equally likely.
  std::size_t uniform_index(std::size_t n);

  // Uniform real in [0, 1).
  double uniform_real();

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::uint64_t state_;
};

}  // namespace agentforge
