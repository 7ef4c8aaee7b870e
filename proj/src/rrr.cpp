#include "multicoap/rrr.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multicoap/error.hpp"
#include "multicoap/linalg.hpp"

namespace multicoap {

Matrix reduced_rank_beta(const Matrix& beta_tilde, const Matrix& gram, int r) {
  const Index p = beta_tilde.rows();
  const Index d = beta_tilde.cols();
  if (r < 1 || r > std::min(p, d)) throw ConfigError("rank must lie in [1, min(p, d)]");
  if (gram.rows() != d || gram.cols() != d) throw ConfigError("gram must be d x d");
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(NumericalErrorKind::NotPositiveDefinite,
                         "reduced-rank regression: covariate Gram matrix is not positive definite");
  }

  Matrix basis;  // p x r' orthonormal, r' <= r
  if (d < p) {
    // beta G beta^T = C C^T with C = beta L; its leading eigenvectors are the
    // left singular vectors u_k = C w_k / sqrt(nu_k) from the d x d problem C^T C.
    const Matrix C = beta_tilde * llt.matrixL();
    const auto eig = linalg::sorted_symmetric_eigen(C.transpose() * C);
    const double top = std::max(eig.values(0), 0.0);
    basis.resize(p, r);
    Index kept = 0;
    for (Index k = 0; k < r; ++k) {
      const double nu = eig.values(k);
      if (!(nu > 1e-14 * top) || nu <= 0.0) break;
      basis.col(kept++) = C * eig.vectors.col(k) / std::sqrt(nu);
    }
    basis.conservativeResize(p, kept);
  } else {
    const auto eig = linalg::sorted_symmetric_eigen(beta_tilde * gram * beta_tilde.transpose());
    basis = eig.vectors.leftCols(r);
  }
  return basis * (basis.transpose() * beta_tilde);
}

RankSelection select_rank(const Matrix& beta_hat, int r_max, double tau) {
  const Index d = beta_hat.cols();
  if (r_max < 1 || r_max > std::min(beta_hat.rows(), d)) throw ConfigError("r_max must lie in [1, min(p, d)]");
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0, 1)");
  const auto eig = linalg::sorted_symmetric_eigen(beta_hat.transpose() * beta_hat);
  RankSelection out;
  out.eigenvalues = eig.values.head(r_max).cwiseMax(0.0);
  const double total = out.eigenvalues.sum();
  if (!(total > 0.0)) {
    throw NumericalError(NumericalErrorKind::DegenerateSpectrum,
                         "rank selection: beta has an all-zero spectrum");
  }
  out.cumulative_ratio.resize(r_max);
  double acc = 0.0;
  out.r_hat = 0;
  for (Index k = 0; k < r_max; ++k) {
    acc += out.eigenvalues(k);
    out.cumulative_ratio(k) = (k + 1 == r_max) ? 1.0 : std::min(acc / total, 1.0);
    if (out.r_hat == 0 && out.cumulative_ratio(k) > tau) out.r_hat = static_cast<int>(k + 1);
  }
  return out;
}

}  // namespace multicoap
