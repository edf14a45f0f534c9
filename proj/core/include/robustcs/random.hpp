#pragma once

#include <cstdint>
#include <random>

namespace robustcs {

// Derives an independent stream seed from a master seed. Distinct stream ids
// give unrelated generators, so regenerating one artifact leaves the others
// untouched.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Deterministic generator with explicit transforms (no library distribution
// objects, whose output is implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  // Standard normal via Box-Muller.
  double normal();

  // Standard Cauchy.
  double cauchy();

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace robustcs
