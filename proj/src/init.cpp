#include <cmath>
#include <sstream>

#include "multicoap/error.hpp"
#include "multicoap/linalg.hpp"
#include "multicoap/random.hpp"
#include "multicoap/vem.hpp"

namespace multicoap {

namespace {

// Leading k eigen-directions of R^T R scaled by sqrt(eigenvalue / rows).
Matrix principal_loadings(const Matrix& gram, Index k, double rows) {
  const auto eig = linalg::sorted_symmetric_eigen(gram);
  Matrix L(gram.rows(), k);
  for (Index c = 0; c < k; ++c) {
    L.col(c) = eig.vectors.col(c) * std::sqrt(std::max(eig.values(c), 0.0) / rows);
  }
  linalg::fix_column_signs(L);
  return L;
}

// Degenerate (all-zero) columns would pin their factors at zero forever.
void jitter_degenerate_columns(Matrix& L, Rng& rng) {
  for (Index c = 0; c < L.cols(); ++c) {
    if (L.col(c).norm() < 1e-8) {
      for (Index j = 0; j < L.rows(); ++j) L(j, c) = 1e-4 * rng.normal();
    }
  }
}

}  // namespace

std::pair<ModelParams, VariationalParams> init_params(const MultiStudyDataset& data, const FitConfig& config) {
  config.validate(data);
  const std::size_t S = data.num_studies();
  const Index p = data.p();
  const Index d = data.d();
  const Index q = config.q;
  Rng rng(config.seed);

  VariationalParams xi;
  xi.studies.resize(S);
  Matrix ztz = Matrix::Zero(d, d);
  Matrix ztm = Matrix::Zero(d, p);
  for (std::size_t s = 0; s < S; ++s) {
    const StudyData& st = data.study(s);
    StudyPosterior& post = xi.studies[s];
    post.M = ((data.counts(s).array() + 1.0).colwise() / st.a.array()).log().matrix();
    post.V = Matrix::Ones(data.n(s), p);
    ztz += st.Z.transpose() * st.Z;
    ztm += st.Z.transpose() * post.M;
  }

  ModelParams theta;
  const double cond = linalg::condition_number_spd(ztz);
  if (!(cond < 1e12)) {
    std::ostringstream msg;
    msg << "covariates are collinear: condition number of Z^T Z is " << cond;
    throw NumericalError(NumericalErrorKind::CollinearCovariates, msg.str());
  }
  theta.beta = linalg::spd_solve_right(ztm.transpose(), ztz, "covariate Gram matrix");

  // Shared directions are those present in every study's leading subspace:
  // average the per-study projections onto the top q + q_s eigenvectors, whose
  // eigenvalues are then the fraction of studies containing each direction.
  // Directions missing from some study start near zero rather than competing
  // with the study-specific loadings. The pooled covariance, scaled far below
  // 1, only breaks ties (and decides everything when S = 1).
  std::vector<Matrix> residuals(S);
  Matrix pooled = Matrix::Zero(p, p);
  Matrix shared = Matrix::Zero(p, p);
  for (std::size_t s = 0; s < S; ++s) {
    residuals[s] = xi.studies[s].M - data.study(s).Z * theta.beta.transpose();
    const Matrix gram = residuals[s].transpose() * residuals[s];
    pooled += gram;
    const Matrix U = linalg::sorted_symmetric_eigen(gram).vectors.leftCols(q + config.qs[s]);
    shared.noalias() += U * U.transpose() / static_cast<double>(S);
  }
  const double top = linalg::sorted_symmetric_eigen(pooled).values(0);
  if (top > 0.0) shared += (1e-3 / top) * pooled;
  const auto shared_eig = linalg::sorted_symmetric_eigen(shared);
  const double cut = 1.0 - 0.5 / static_cast<double>(S);
  Index k = 0;
  while (k < q && shared_eig.values(k) > cut) ++k;
  theta.A = Matrix::Zero(p, q);
  if (k > 0) {
    const Matrix W = shared_eig.vectors.leftCols(k);
    theta.A.leftCols(k) = W * principal_loadings(W.transpose() * pooled * W, k, static_cast<double>(data.total_n()));
  }
  linalg::fix_column_signs(theta.A);
  jitter_degenerate_columns(theta.A, rng);

  // Remove the span of A before extracting study-specific directions.
  Eigen::HouseholderQR<Matrix> qr(theta.A);
  const Matrix Q = qr.householderQ() * Matrix::Identity(p, q);
  theta.B.resize(S);
  theta.lambda = Vector::Ones(static_cast<Index>(S));
  for (std::size_t s = 0; s < S; ++s) {
    const Index qs = config.qs[s];
    const Matrix rest = residuals[s] - (residuals[s] * Q) * Q.transpose();
    theta.B[s] = principal_loadings(rest.transpose() * rest, qs, static_cast<double>(data.n(s)));
    jitter_degenerate_columns(theta.B[s], rng);

    StudyPosterior& post = xi.studies[s];
    post.Mf = Matrix::Zero(data.n(s), q);
    post.Sf = Matrix::Identity(q, q);
    post.Mh = Matrix::Zero(data.n(s), qs);
    post.Sh = Matrix::Identity(qs, qs);
  }
  return {std::move(theta), std::move(xi)};
}

}  // namespace multicoap
