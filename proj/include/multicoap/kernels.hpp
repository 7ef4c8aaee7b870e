#pragma once

#include <algorithm>
#include <cmath>

#include "multicoap/types.hpp"

// Data-parallel inner loops of the variational EM engine.
//
// kernels::*            OpenMP versions; every output entry is written by
//                       exactly one thread and every reduction is first
//                       formed per column, then summed serially in column
//                       order, so results are bit-identical for any thread
//                       count.
// kernels::reference::* plain serial loops with the same contracts, kept as
//                       the testing baseline.

namespace multicoap::kernels {

/// Upper bound on any log-rate fed to exp() inside the E-step.
inline constexpr double kMaxLogRate = 41.44653167389282;  // ln(1e18)

struct Exec {
  int threads = 1;
};

struct LatentMoments {
  double mu;
  double sigma2;
};

/// One Laplace/Newton update of the posterior moments of y_sij.
/// The expansion point y0 is clamped to kMaxLogRate before use.
inline LatentMoments latent_newton_step(double x, double a, double y0, double ztilde, double inv_lambda) {
  const double y = std::min(y0, kMaxLogRate);
  const double rate = a * std::exp(y);
  const double mu = (x - rate * (1.0 - y) + inv_lambda * ztilde) / (inv_lambda + rate);
  const double sigma2 = 1.0 / (a * std::exp(std::min(mu, kMaxLogRate)) + inv_lambda);
  return {mu, sigma2};
}

/// x ln x - x - ln(x!), via Stirling's series once lgamma would cancel badly.
inline double stirling_remainder(double x) {
  if (x == 0.0) return 0.0;
  if (x < 1e5) return x * std::log(x) - x - std::lgamma(x + 1.0);
  constexpr double kHalfLog2Pi = 0.91893853320467274;
  return -0.5 * std::log(x) - kHalfLog2Pi - 1.0 / (12.0 * x) + 1.0 / (360.0 * x * x * x);
}

/// E_q[ln Poisson(x | a e^y)] + entropy of N(mu, sigma2) - 1/2 ln(2 pi), i.e. the
/// per-entry Poisson and entropy part of the ELBO with every constant kept.
/// Arranged so that large counts do not cancel catastrophically.
inline double poisson_entropy_term(double x, double a, double mu, double sigma2) {
  const double entropy = 0.5 * std::log(sigma2) + 0.5;
  if (x == 0.0) return -a * std::exp(mu + 0.5 * sigma2) + entropy;
  const double t = mu + std::log(a) + 0.5 * sigma2 - std::log(x);
  return stirling_remainder(x) + x * (t - std::expm1(t)) - 0.5 * x * sigma2 + entropy;
}

/// out = Z beta^T + Mf A^T + Mh B^T (n x p).
void linear_predictor(const Matrix& Z, const Matrix& beta, const Matrix& Mf, const Matrix& A,
                      const Matrix& Mh, const Matrix& B, Matrix& out, Exec exec);

/// In-place (M, V) update; the current M is the expansion point.
void latent_update(const Matrix& X, const Vector& a, const Matrix& ztilde, double inv_lambda, Matrix& M,
                   Matrix& V, Exec exec);

/// out = scale * R * L * S, row by row (n x k).
void project_rows(const Matrix& R, const Matrix& L, const Matrix& S, double scale, Matrix& out, Exec exec);

/// out = R^T M (p x k), one output row per variable.
void cross_product(const Matrix& R, const Matrix& M, Matrix& out, Exec exec);

/// sum_ij poisson_entropy_term(x, a, mu, sigma2), or with keep_constants false
/// sum_ij { x mu - a exp(mu + sigma2/2) + ln(sigma2)/2 }.
/// Throws NumericalError if an exponential overflows.
double poisson_entropy_sum(const Matrix& X, const Vector& a, const Matrix& M, const Matrix& V,
                           bool keep_constants, Exec exec);

/// sum_ij { (mu - ztilde)^2 + sigma2 }.
double residual_energy(const Matrix& M, const Matrix& ztilde, const Matrix& V, Exec exec);

namespace reference {

void linear_predictor(const Matrix& Z, const Matrix& beta, const Matrix& Mf, const Matrix& A,
                      const Matrix& Mh, const Matrix& B, Matrix& out);
void latent_update(const Matrix& X, const Vector& a, const Matrix& ztilde, double inv_lambda, Matrix& M,
                   Matrix& V);
void project_rows(const Matrix& R, const Matrix& L, const Matrix& S, double scale, Matrix& out);
void cross_product(const Matrix& R, const Matrix& M, Matrix& out);
double poisson_entropy_sum(const Matrix& X, const Vector& a, const Matrix& M, const Matrix& V,
                           bool keep_constants);
double residual_energy(const Matrix& M, const Matrix& ztilde, const Matrix& V);

}  // namespace reference

/// Dispatches to the OpenMP or the reference kernels.
class KernelSet {
 public:
  KernelSet(Backend backend, int threads) : backend_(backend), exec_{threads} {}

  void linear_predictor(const Matrix& Z, const Matrix& beta, const Matrix& Mf, const Matrix& A,
                        const Matrix& Mh, const Matrix& B, Matrix& out) const;
  void latent_update(const Matrix& X, const Vector& a, const Matrix& ztilde, double inv_lambda, Matrix& M,
                     Matrix& V) const;
  void project_rows(const Matrix& R, const Matrix& L, const Matrix& S, double scale, Matrix& out) const;
  void cross_product(const Matrix& R, const Matrix& M, Matrix& out) const;
  double poisson_entropy_sum(const Matrix& X, const Vector& a, const Matrix& M, const Matrix& V,
                             bool keep_constants) const;
  double residual_energy(const Matrix& M, const Matrix& ztilde, const Matrix& V) const;

 private:
  Backend backend_;
  Exec exec_;
};

}  // namespace multicoap::kernels
