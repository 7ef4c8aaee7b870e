#pragma once

#include <span>
#include <vector>

#include "multicoap/types.hpp"

namespace multicoap {

/// Cumulative explained-variance (CUP) choice of the factor counts.
struct FactorSelection {
  int q_hat = 0;
  std::vector<int> qs_hat;
  Vector nu_f;               // column energies of A, length q_max
  std::vector<Vector> nu_h;  // column energies of each B_s, length q_{s,max}
  double tau = 0.95;
};

inline constexpr double kDefaultTau = 0.95;

/// min{k : sum_{j<=k} nu_j / sum_j nu_j > tau}. Throws on an all-zero nu.
int cup_cut(std::span<const double> nu, double tau);

/// Column energies sum_j L(j, k)^2.
Vector column_energies(const Matrix& L);

/// CUP selection from an already fitted (identifiability-rotated) model.
FactorSelection select_factors_from_fit(const FitResult& fit, double tau);

/// Fits once at (q_max, qs_max) and applies the CUP rule to A and each B_s.
/// Does not refit at the selected sizes.
FactorSelection select_factors(const MultiStudyDataset& data, int q_max, const std::vector<int>& qs_max,
                               double tau, const FitConfig& base);

}  // namespace multicoap
