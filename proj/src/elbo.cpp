#include <cmath>

#include "multicoap/linalg.hpp"
#include "multicoap/vem.hpp"

namespace multicoap {

EStepWorkspace::EStepWorkspace(const MultiStudyDataset& data) {
  predictor.reserve(data.num_studies());
  for (std::size_t s = 0; s < data.num_studies(); ++s) predictor.emplace_back(data.n(s), data.p());
}

double elbo(const ModelParams& theta, const VariationalParams& xi, const MultiStudyDataset& data,
            const kernels::KernelSet& kernels, ElboForm form) {
  const bool keep_constants = form == ElboForm::Bound;
  const auto p = static_cast<double>(data.p());
  const Matrix AtA = theta.A.transpose() * theta.A;
  double total = 0.0;
  Matrix predictor;
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const StudyData& st = data.study(s);
    const StudyPosterior& post = xi.studies[s];
    const auto n = static_cast<double>(data.n(s));
    const double lambda = theta.lambda(static_cast<Index>(s));
    const Matrix BtB = theta.B[s].transpose() * theta.B[s];

    kernels.linear_predictor(st.Z, theta.beta, post.Mf, theta.A, post.Mh, theta.B[s], predictor);
    const double poisson_entropy = kernels.poisson_entropy_sum(data.counts(s), st.a, post.M, post.V, keep_constants);
    const double residual = kernels.residual_energy(post.M, predictor, post.V);
    // sum_ij alpha_j^T Sf alpha_j = n * tr(Sf A^T A), likewise for B_s.
    const double loading_var = n * ((post.Sf * AtA).trace() + (post.Sh * BtB).trace());

    total += poisson_entropy;
    total -= 0.5 * ((residual + loading_var) / lambda + n * p * std::log(lambda));
    total -= 0.5 * (post.Mf.squaredNorm() + post.Mh.squaredNorm() + n * (post.Sf.trace() + post.Sh.trace()));
    total += 0.5 * n * (linalg::log_det_spd(post.Sf) + linalg::log_det_spd(post.Sh));
    if (keep_constants) total += 0.5 * n * static_cast<double>(post.Sf.rows() + post.Sh.rows());
  }
  return total;
}

}  // namespace multicoap
