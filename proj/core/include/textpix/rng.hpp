#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace textpix {

// Seeded source of randomness. mt19937_64's output sequence is fixed by the standard; the
// mappings to doubles and bounded integers below are done by hand so that every platform
// sees the same numbers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n), n > 0, by rejection (no modulo bias).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

// Independent sub-seed for a named stream ("data", "init", "batch", "sampling", ...).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

}  // namespace textpix
