#pragma once

#include <cstdint>

#include "uq/normal.hpp"

namespace uq {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: the n-th output is a hash of (key, n), so a stream is fully determined
/// by (seed, problem, level, replicate, attempt) regardless of which thread evaluates it.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t problem, int level, std::uint64_t replicate,
               std::uint32_t attempt = 0) {
    std::uint64_t k = splitmix64(seed);
    k = splitmix64(k ^ problem);
    k = splitmix64(k ^ static_cast<std::uint64_t>(level));
    k = splitmix64(k ^ replicate);
    key_ = splitmix64(k ^ attempt);
  }

  std::uint64_t key() const { return key_; }

  std::uint64_t next_u64() { return splitmix64(key_ ^ splitmix64(counter_++)); }

  /// Uniform on the open interval (0, 1).
  double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double normal() { return normal_quantile(uniform()); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace uq
