#pragma once

#include <cstdint>

namespace msa {

// splitmix64 (Steele, Lea & Flood 2014). Fixed published constants so that
// datasets are reproducible bit-exactly across languages:
//   state += 0x9E3779B97F4A7C15
//   z = state; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// Uniform doubles take the top 53 bits: (x >> 11) * 2^-53, in [0, 1).
// Normal deviates via Box-Muller on two consecutive uniforms:
//   z = sqrt(-2 log(1 - u1)) * cos(2 pi u2)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  double next_uniform();
  double next_normal();

 private:
  std::uint64_t state_;
};

}  // namespace msa
