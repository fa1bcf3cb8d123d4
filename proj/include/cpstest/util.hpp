#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cpstest {

inline constexpr const char* kToolVersion = "0.1.0";

// Formats a double as fixed-point decimal with the fewest digits that
// round-trip, but always at least one digit after the point and never
// an exponent. Used by the canonical scenario serializer.
std::string format_fixed(double value);

// FNV-1a, stable across platforms; used for corpus dedup and tie-breaking.
std::uint64_t fnv1a64(std::string_view data);

// Counter-based PRNG wrapper around splitmix64. All randomized components
// (fuzzing, equivalence sampling, test data generation) draw from this so
// results do not depend on libstdc++ distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

  // Uniform in [0, 1).
  double next_double();

  bool next_bool() { return (next_u64() & 1u) != 0; }

  // Derives an independent stream, e.g. one per fuzz iteration.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_;
};

}  // namespace cpstest
