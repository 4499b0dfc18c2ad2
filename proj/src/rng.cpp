#include "hvrs/rng.hpp"

#include <cmath>
#include <numbers>

namespace hvrs {

Rng::Rng(uint64_t seed, uint64_t stream) {
  inc_ = (stream << 1u) | 1u;
  state_ = 0u;
  next_u32();
  state_ += seed;
  next_u32();
}

uint32_t Rng::next_u32() {
  uint64_t old = state_;
  state_ = old * 6364136223846793005ULL + inc_;
  uint32_t xorshifted = static_cast<uint32_t>(((old >> 18u) ^ old) >> 27u);
  uint32_t rot = static_cast<uint32_t>(old >> 59u);
  return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
}

uint32_t Rng::next_below(uint32_t n) {
  if (n == 0) return 0;
  // Lemire-style rejection-free enough for our purposes: use 64-bit multiply.
  return static_cast<uint32_t>((static_cast<uint64_t>(next_u32()) * n) >> 32);
}

double Rng::uniform() {
  const uint64_t hi = next_u32();
  const uint64_t lo = next_u32();
  const uint64_t bits = (hi << 21) ^ (lo >> 11);  // 53 random bits
  return static_cast<double>(bits & ((1ULL << 53) - 1)) * 0x1.0p-53;
}

double Rng::uniform_pos() {
  return 1.0 - uniform();
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  const double u1 = uniform_pos();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t mix64(uint64_t a) {
  a ^= a >> 30;
  a *= 0xbf58476d1ce4e5b9ULL;
  a ^= a >> 27;
  a *= 0x94d049bb133111ebULL;
  a ^= a >> 31;
  return a;
}

uint64_t hash_combine(uint64_t a, uint64_t b) { return mix64(a + 0x9e3779b97f4a7c15ULL + (b << 6) + (b >> 2)); }

uint64_t hash_str(uint64_t seed, const char* s) {
  uint64_t h = seed ^ 0xcbf29ce484222325ULL;
  for (; *s; ++s) {
    h ^= static_cast<unsigned char>(*s);
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

}  // namespace hvrs
