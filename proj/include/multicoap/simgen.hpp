#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "multicoap/types.hpp"

namespace multicoap {

/// Largest Poisson rate the simulator will draw from (ln of it equals kMaxLogRate).
inline constexpr double kMaxSimulatedRate = 1e18;

struct SimConfig {
  std::vector<int> n{100, 150};
  int p = 100;
  int d = 10;
  int q = 3;
  std::vector<int> qs{2, 2};
  int r0 = 2;
  double rho_a = 2.0;
  double rho_b = 3.5;
  double rho_z = 0.1;
  double sigma0_sq = 1.0;
  std::array<std::int64_t, 2> a_range{1, 1};
  /// Drives Z, F, H, noise, normalizers and counts.
  std::uint64_t seed = 1;
  /// Drives beta0, A0 and B_s0, which stay fixed across replicate seeds.
  std::uint64_t structure_seed = 1;
  /// Rates above kMaxSimulatedRate are drawn at kMaxSimulatedRate when true;
  /// otherwise generation fails with SignalTooStrong.
  bool censor_rates = true;

  void validate() const;
};

struct SimTruth {
  Matrix beta0;            // p x d
  Matrix A0;               // p x q
  std::vector<Matrix> B0;  // p x q_s
  std::vector<Matrix> F;   // n_s x q
  std::vector<Matrix> H;   // n_s x q_s
  double sigma0_sq = 1.0;
  /// Entries whose rate was censored at kMaxSimulatedRate, over all studies.
  std::int64_t censored = 0;
};

struct SimStructure {
  Matrix beta0;
  Matrix A0;
  std::vector<Matrix> B0;
};

/// Fixed parameters, a function of the configuration and structure_seed only.
SimStructure generate_structure(const SimConfig& config);

/// Draws one replicate. A Poisson rate above kMaxSimulatedRate is censored, or
/// raises NumericalError(SignalTooStrong) when censor_rates is false.
std::pair<MultiStudyDataset, SimTruth> generate(const SimConfig& config);

}  // namespace multicoap
