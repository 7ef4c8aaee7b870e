#pragma once

#include <cstdint>
#include <random>

#include "multicoap/types.hpp"

namespace multicoap {

/// Seeded generator used by initialization and simulation.
///
/// Stream layout, so other implementations can replay it:
///   - engine: std::mt19937_64 seeded with the 64-bit seed;
///   - uniform(): (engine() >> 11) * 2^-53, in [0, 1);
///   - normal(): Box-Muller on two uniforms u1, u2 with u1 mapped to (0, 1]
///     as 1 - u1; yields r*cos(2*pi*u2) first and caches r*sin(2*pi*u2);
///   - poisson(): std::poisson_distribution<int64_t> on the same engine
///     (implementation-defined; compare moments, not bits, across toolchains);
///   - uniform_int(a, b): a + floor(uniform() * (b - a + 1)).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double normal();
  std::int64_t poisson(double mean);
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  /// rows x cols standard normal matrix, filled column by column.
  Matrix normal_matrix(Index rows, Index cols);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace multicoap
