#pragma once

#include <vector>

#include "multicoap/simgen.hpp"
#include "multicoap/types.hpp"

namespace multicoap {

/// Tr{D^T P D} / Tr(D^T D) with P the projection onto span(D_hat).
/// An estimate with no columns scores 0; an all-zero D scores 1 (its columns
/// trivially lie in any span). Throws if D_hat^T D_hat has condition number > 1e12.
double trace_statistic(const Matrix& D_hat, const Matrix& D);

/// sqrt(||beta_hat - beta0||_F^2 / (p d)).
double beta_error(const Matrix& beta_hat, const Matrix& beta0);

struct ScoreReport {
  double A_tr = 0.0;
  double F_tr = 0.0;
  double B_tr = 0.0;
  double H_tr = 0.0;
  double beta_er = 0.0;
  std::vector<double> B_tr_study;
  std::vector<double> F_tr_study;
  std::vector<double> H_tr_study;
  /// q / min(n, p): expected F_tr of an uninformative factor estimate.
  double F_baseline = 0.0;
  /// F_tr is no better than twice the random baseline.
  bool F_near_baseline = false;
};

ScoreReport score(const FitResult& fit, const SimTruth& truth);

}  // namespace multicoap
