#include "agentforge/rng.hpp"

#include "agentforge/hash.hpp"

#include <limits>
#include <stdexcept>

namespace agentforge {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

RandomStream RandomStream::child(std::string_view key) const {
  std::uint64_t mixed = state_ ^ (fnv1a64(key) + 0x9e3779b97f4a7c15ULL);
  // One warm-up round so adjacent parent states with related keys diverge.
  std::uint64_t s = mixed;
  splitmix64(s);
  return RandomStream(s);
}

std::uint64_t RandomStream::next_u64() { return splitmix64(state_); }

std::size_t RandomStream::uniform_index(std::size_t n) {
  if (n == 0) {
    throw std::invalid_argument("uniform_index: n must be positive");
  }
  const std::uint64_t bound = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t value = next_u64();
  while (value >= limit) {
    value = next_u64();
  }
  return static_cast<std::size_t>(value % bound);
}

double RandomStream::uniform_real() {
  // 53 high bits -> [0,1) with full double precision.
  return static_cast<double>(next_u64() >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace agentforge
