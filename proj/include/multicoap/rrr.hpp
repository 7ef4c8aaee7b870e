#pragma once

#include "multicoap/types.hpp"

namespace multicoap {

/// Rank-r projection V_(r) V_(r)^T beta_tilde, where V_(r) holds the leading r
/// eigenvectors of beta_tilde * gram * beta_tilde^T. When d < p the
/// eigenvectors come from the d x d dual problem.
Matrix reduced_rank_beta(const Matrix& beta_tilde, const Matrix& gram, int r);

struct RankSelection {
  int r_hat = 0;
  Vector eigenvalues;       // leading r_max eigenvalues of beta^T beta, nonincreasing
  Vector cumulative_ratio;  // partial sums over the total, last entry 1
};

/// Smallest r whose cumulative eigenvalue share strictly exceeds tau.
RankSelection select_rank(const Matrix& beta_hat, int r_max, double tau);

}  // namespace multicoap
