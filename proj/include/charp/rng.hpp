#pragma once

#include <cstdint>

namespace charp {

// splitmix64: tiny, deterministic across platforms and standard library
// versions (std::uniform_int_distribution is not), which the byte-identical
// report contract requires.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform value in [0, n). Modulo bias is ~2^-60 for the tiny n used here.
  std::uint32_t below(std::uint32_t n) {
    return static_cast<std::uint32_t>(next() % n);
  }

private:
  std::uint64_t state_;
};

// Counter-based per-case seed derivation: case results are independent of
// how cases are partitioned across worker threads.
inline std::uint64_t case_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 g(master ^ (0xA0761D6478BD642FULL + index * 0xE7037ED1A0B428DBULL));
  g.next();
  return g.next();
}

}  // namespace charp
