#ifndef HSCG_RNG_HPP
#define HSCG_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace hscg {

// Seeded RNG with hand-coded transforms so that sampled streams depend only
// on the seed, not on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, n), n > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  // Standard normal via Box-Muller (two uniforms per call, no cache).
  double normal();

  // k distinct indices from [0, n), ascending order.
  std::vector<int> sample_without_replacement(int n, int k);

  // k indices from [0, n) i.i.d., ascending order.
  std::vector<int> sample_with_replacement(int n, int k);

  // Derive an independent stream (e.g. for output selection).
  Rng split(std::uint64_t salt) const;

 private:
  std::mt19937_64 gen_;
};

}  // namespace hscg

#endif
