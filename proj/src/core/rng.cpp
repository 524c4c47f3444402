#include "core/rng.hpp"

#include <stdexcept>

namespace treebandit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

RngStream::RngStream(std::uint64_t seed, std::string_view label)
    : key_(splitmix64_mix(splitmix64_mix(seed + kGolden) ^ fnv1a64(label))) {}

RngStream RngStream::split(std::string_view label) const {
  return RngStream(splitmix64_mix(key_ ^ splitmix64_mix(fnv1a64(label) + 0x632BE59BD9B4E019ULL)));
}

RngStream RngStream::split(std::uint64_t index) const {
  return RngStream(splitmix64_mix(key_ + splitmix64_mix(index * kGolden + 0x2545F4914F6CDD1DULL)));
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t x = key_ + (++counter_) * kGolden;
  return splitmix64_mix(x);
}

double RngStream::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t RngStream::uniform_index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  if (n == 1) return 0;
  // Lemire's multiply-shift with rejection: unbiased and deterministic.
  const auto range = static_cast<std::uint64_t>(n);
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

}  // namespace treebandit
