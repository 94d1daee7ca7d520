#ifndef RARING_RNG_HPP_
#define RARING_RNG_HPP_

#include <cstdint>
#include <random>

namespace raring {

// SplitMix64 finalizer. Used only to derive independent seeds from a master
// seed and a stream index; never as a generator on its own.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                    std::uint64_t index = 0) {
  return mix64(mix64(mix64(master) ^ stream) ^ index);
}

// Seeded random stream. Uniform variates are built from the raw 64-bit output
// so that draws are identical across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Stream for replication `index` of sub-stream `stream` under `master`.
  static Rng derived(std::uint64_t master, std::uint64_t stream,
                     std::uint64_t index) {
    return Rng(derive_seed(master, stream, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1].
  double uniform_pos() { return 1.0 - uniform(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace raring

#endif  // RARING_RNG_HPP_
