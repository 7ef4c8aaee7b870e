#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

#include "multicoap/vem.hpp"

namespace multicoap {

namespace {

void refresh_factor_posteriors(const ModelParams& theta, VariationalParams& xi, const MultiStudyDataset& data,
                               const kernels::KernelSet& kernels) {
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    FactorPosterior fp = estep_update_factors(theta, xi, data, s, kernels);
    StudyPosterior& post = xi.studies[s];
    post.Mf = std::move(fp.Mf);
    post.Sf = std::move(fp.Sf);
    post.Mh = std::move(fp.Mh);
    post.Sh = std::move(fp.Sh);
  }
}

// With f ~ N(0, Psi) the ELBO is maximized over Psi at the average second
// moment of q(f). Rescaling f by L^{-1} and the loadings by L (Psi = L L^T)
// returns to Psi = I without changing the ELBO.
void fold_second_moment(const std::vector<const Matrix*>& means, const std::vector<Matrix*>& mean_out,
                        const std::vector<Matrix*>& covs, std::vector<Matrix*> loadings) {
  const Index k = covs.front()->rows();
  if (k == 0) return;
  Matrix psi = Matrix::Zero(k, k);
  double count = 0.0;
  for (std::size_t s = 0; s < means.size(); ++s) {
    const auto n = static_cast<double>(means[s]->rows());
    psi.noalias() += means[s]->transpose() * *means[s] + n * *covs[s];
    count += n;
  }
  psi /= count;
  Eigen::LLT<Matrix> llt(psi);
  if (llt.info() != Eigen::Success) return;
  const Matrix L = llt.matrixL();
  const Matrix L_inv = L.triangularView<Eigen::Lower>().solve(Matrix::Identity(k, k));
  for (std::size_t s = 0; s < means.size(); ++s) {
    *mean_out[s] = *means[s] * L_inv.transpose();
    *covs[s] = L_inv * *covs[s] * L_inv.transpose();
    *covs[s] = 0.5 * (*covs[s] + covs[s]->transpose());
  }
  for (Matrix* B : loadings) *B = *B * L;
}

void expand_factor_scales(ModelParams& theta, VariationalParams& xi) {
  std::vector<const Matrix*> means;
  std::vector<Matrix*> outs;
  std::vector<Matrix*> covs;
  for (StudyPosterior& post : xi.studies) {
    means.push_back(&post.Mf);
    outs.push_back(&post.Mf);
    covs.push_back(&post.Sf);
  }
  fold_second_moment(means, outs, covs, {&theta.A});
  for (std::size_t s = 0; s < xi.studies.size(); ++s) {
    StudyPosterior& post = xi.studies[s];
    fold_second_moment({&post.Mh}, {&post.Mh}, {&post.Sh}, {&theta.B[s]});
  }
}

// Log-rates depend on (beta, m_f) only through Z beta^T + m_f A^T, so the part
// of m_f explained by Z U (U spanning the row space beta may use) can move into
// beta without changing the fit; the prior term can only improve. Only f
// qualifies: beta is shared across studies.
void absorb_factor_means(ModelParams& theta, VariationalParams& xi, const MultiStudyDataset& data,
                         std::optional<int> rank) {
  const Index q = theta.A.cols();
  const Index d = data.d();
  Matrix U = Matrix::Identity(d, d);
  if (rank && *rank < std::min(data.p(), d)) {
    Eigen::JacobiSVD<Matrix> svd(theta.beta, Eigen::ComputeThinV);
    U = svd.matrixV().leftCols(*rank);
  }
  Matrix ZU(data.total_n(), U.cols());
  Matrix M(data.total_n(), q);
  Index row = 0;
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const Index n = data.n(s);
    ZU.middleRows(row, n) = data.study(s).Z * U;
    M.middleRows(row, n) = xi.studies[s].Mf;
    row += n;
  }
  const Matrix K = ZU.colPivHouseholderQr().solve(M);  // r x q
  if (!K.allFinite()) return;
  row = 0;
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const Index n = data.n(s);
    xi.studies[s].Mf.noalias() -= ZU.middleRows(row, n) * K;
    row += n;
  }
  theta.beta.noalias() += theta.A * K.transpose() * U.transpose();
}

std::vector<double> cross_block_overlap(const ModelParams& theta) {
  std::vector<double> out;
  for (const Matrix& B : theta.B) {
    const double scale = theta.A.norm() * B.norm();
    out.push_back(scale > 0.0 ? (theta.A.transpose() * B).norm() / scale : 0.0);
  }
  return out;
}

}  // namespace

FitResult fit(const MultiStudyDataset& data, const FitConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  config.validate(data);
  const kernels::KernelSet kernels(config.backend, config.threads);
  auto [theta, xi] = init_params(data, config);
  EStepWorkspace ws(data);

  FitResult result;
  result.initial_elbo = elbo(theta, xi, data, kernels);
  double previous = result.initial_elbo;
  for (int iter = 1; iter <= config.max_iter; ++iter) {
    estep_update_latent(theta, xi, data, ws, kernels);
    refresh_factor_posteriors(theta, xi, data, kernels);
    if (config.parameter_expansion) {
      absorb_factor_means(theta, xi, data, config.rank);
      expand_factor_scales(theta, xi);
    }
    Loadings loadings = mstep_update_loadings(theta, xi, data, kernels);
    theta.A = std::move(loadings.A);
    theta.B = std::move(loadings.B);
    theta.beta = mstep_update_beta(theta, xi, data, config.rank, kernels);
    theta.lambda = mstep_update_lambda(theta, xi, data, kernels);

    const double current = elbo(theta, xi, data, kernels);
    result.elbo_trace.push_back(current);
    result.iterations = iter;
    if (std::abs(current - previous) / std::abs(previous) < config.eps) {
      result.converged = true;
      break;
    }
    previous = current;
  }

  // Bring (Mf, Sf, Mh, Sh) in line with the final (A, B, lambda), then fix the rotation.
  refresh_factor_posteriors(theta, xi, data, kernels);
  auto [theta_id, xi_id] = apply_identifiability(std::move(theta), std::move(xi));
  result.params = std::move(theta_id);
  result.vparams = std::move(xi_id);
  result.elbo_trace.push_back(elbo(result.params, result.vparams, data, kernels));
  result.cross_block_overlap = cross_block_overlap(result.params);
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace multicoap
