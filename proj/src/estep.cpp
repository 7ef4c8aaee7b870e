#include <cmath>
#include <limits>

#include "multicoap/linalg.hpp"
#include "multicoap/vem.hpp"

namespace multicoap {

kernels::LatentMoments estep_update_y(double x, double a, double y0, double ztilde, double lambda) {
  const double inv_lambda = std::isinf(lambda) ? 0.0 : 1.0 / lambda;
  return kernels::latent_newton_step(x, a, y0, ztilde, inv_lambda);
}

void estep_update_latent(const ModelParams& theta, VariationalParams& xi, const MultiStudyDataset& data,
                         EStepWorkspace& ws, const kernels::KernelSet& kernels) {
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const StudyData& st = data.study(s);
    StudyPosterior& post = xi.studies[s];
    kernels.linear_predictor(st.Z, theta.beta, post.Mf, theta.A, post.Mh, theta.B[s], ws.predictor[s]);
    kernels.latent_update(data.counts(s), st.a, ws.predictor[s], 1.0 / theta.lambda(static_cast<Index>(s)),
                          post.M, post.V);
  }
}

FactorPosterior estep_update_factors(const ModelParams& theta, const VariationalParams& xi,
                                     const MultiStudyDataset& data, std::size_t study,
                                     const kernels::KernelSet& kernels) {
  const StudyData& st = data.study(study);
  const StudyPosterior& post = xi.studies[study];
  const double inv_lambda = 1.0 / theta.lambda(static_cast<Index>(study));
  const Matrix& B = theta.B[study];
  const Matrix none(data.p(), 0);
  const Matrix none_rows(data.n(study), 0);

  FactorPosterior out;
  Matrix offset;
  Matrix residual;

  const Index q = theta.q();
  out.Sf = linalg::spd_inverse(inv_lambda * (theta.A.transpose() * theta.A) + Matrix::Identity(q, q),
                               "shared factor posterior covariance");
  kernels.linear_predictor(st.Z, theta.beta, none_rows, none, post.Mh, B, offset);
  residual = post.M - offset;
  kernels.project_rows(residual, theta.A, out.Sf, inv_lambda, out.Mf);

  const Index qs = B.cols();
  out.Sh = linalg::spd_inverse(inv_lambda * (B.transpose() * B) + Matrix::Identity(qs, qs),
                               "study-specific factor posterior covariance");
  kernels.linear_predictor(st.Z, theta.beta, out.Mf, theta.A, none_rows, none, offset);
  residual = post.M - offset;
  kernels.project_rows(residual, B, out.Sh, inv_lambda, out.Mh);
  return out;
}

}  // namespace multicoap
