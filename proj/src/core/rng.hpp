#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace treebandit {

/// Counter-based random stream.
///
/// A stream is a 64-bit key plus a draw counter; draw i is a SplitMix64
/// finalizer applied to key + i * golden. Keys are derived by hashing
/// (seed, label) and then (parent key, sub-label or index), so any stream can
/// be re-created from its derivation path alone and the same path yields the
/// same draws on every platform. No std:: distribution is used.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::string_view label);

  RngStream split(std::string_view label) const;
  RngStream split(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();
  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);

  std::uint64_t key() const { return key_; }
  std::uint64_t counter() const { return counter_; }

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64_mix(std::uint64_t x);

}  // namespace treebandit
