#pragma once

#include <cstdint>

namespace hvrs {

// PCG32 (Melissa O'Neill's pcg32_random_r). Small, fast, and the whole state
// is two u64s, so derived per-epoch/per-env streams never need serialization.
class Rng {
 public:
  Rng() : Rng(0x853c49e6748fea9bULL, 0xda3e39cb94b95bdbULL) {}
  Rng(uint64_t seed, uint64_t stream);

  uint32_t next_u32();
  // Uniform in [0, n).
  uint32_t next_below(uint32_t n);
  // Uniform double in [0, 1), 53-bit resolution.
  double uniform();
  // Uniform double in (0, 1].
  double uniform_pos();
  double uniform(double lo, double hi);
  // Standard normal via Box-Muller (cosine branch only, no cached state).
  double normal();

 private:
  uint64_t state_;
  uint64_t inc_;
};

// Stable 64-bit mix for deriving stream ids from (seed, tag...) tuples.
uint64_t mix64(uint64_t a);
uint64_t hash_combine(uint64_t a, uint64_t b);
uint64_t hash_str(uint64_t seed, const char* s);

}  // namespace hvrs
