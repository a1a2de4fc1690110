#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace ldlab {

/// Counter-based random stream: every draw is a pure hash of
/// (seed, replica, counter), so ensembles are reproducible no matter how
/// replicas are scheduled across threads.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t replica)
      : key_(mix(seed ^ mix(replica * 0x9e3779b97f4a7c15ull))), ctr_(0) {}

  /// i-th draw of the stream as a 64-bit word; advances the counter.
  std::uint64_t next_u64() { return at(ctr_++); }

  /// random word at an explicit counter (does not advance the stream)
  std::uint64_t at(std::uint64_t counter) const {
    return mix(key_ + counter * 0x9e3779b97f4a7c15ull);
  }

  /// uniform draw in the open interval (0,1); never returns 0 or 1
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double exponential(double rate) { return -std::log(uniform()) / rate; }

  std::uint64_t counter() const { return ctr_; }
  void seek(std::uint64_t counter) { ctr_ = counter; }

 private:
  // SplitMix64 finalizer: full-avalanche 64-bit mix
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t ctr_;
};

/// FNV-1a 64-bit hash, used to fingerprint configs in artifacts.
inline std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace ldlab
