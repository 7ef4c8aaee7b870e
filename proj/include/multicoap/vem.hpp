#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "multicoap/kernels.hpp"
#include "multicoap/types.hpp"

namespace multicoap {

/// Scratch buffers bound to one dataset: the linear predictor
/// z_si^T beta_j + alpha_j^T m_f,si + gamma_sj^T m_h,si per study.
struct EStepWorkspace {
  explicit EStepWorkspace(const MultiStudyDataset& data);
  std::vector<Matrix> predictor;
};

enum class ElboForm {
  /// A true lower bound on the log marginal likelihood (all constants kept).
  Bound,
  /// The bound minus sum_ij {x ln a - ln x! + 1/2} + sum_s n_s (q + q_s)/2,
  /// i.e. the objective with its data-only constant dropped.
  DropConstant,
};

/// Evidence lower bound summed over all studies and observations.
double elbo(const ModelParams& theta, const VariationalParams& xi, const MultiStudyDataset& data,
            const kernels::KernelSet& kernels = kernels::KernelSet(Backend::Parallel, 1),
            ElboForm form = ElboForm::Bound);

/// Single-entry update of (mu, sigma^2); pass lambda = +inf for lambda^{-1} = 0.
kernels::LatentMoments estep_update_y(double x, double a, double y0, double ztilde, double lambda);

/// Updates (M, V) of every study in place, using the current M as expansion point.
void estep_update_latent(const ModelParams& theta, VariationalParams& xi, const MultiStudyDataset& data,
                         EStepWorkspace& ws, const kernels::KernelSet& kernels);

struct FactorPosterior {
  Matrix Mf;
  Matrix Sf;
  Matrix Mh;
  Matrix Sh;
};

/// Closed-form posterior of (f, h) for one study; m_h uses the new m_f.
FactorPosterior estep_update_factors(const ModelParams& theta, const VariationalParams& xi,
                                     const MultiStudyDataset& data, std::size_t study,
                                     const kernels::KernelSet& kernels = kernels::KernelSet(Backend::Parallel, 1));

struct Loadings {
  Matrix A;
  std::vector<Matrix> B;
};

/// Shared loadings A (lambda-weighted across studies), then each B_s using the new A.
Loadings mstep_update_loadings(const ModelParams& theta, const VariationalParams& xi,
                               const MultiStudyDataset& data,
                               const kernels::KernelSet& kernels = kernels::KernelSet(Backend::Parallel, 1));

/// Weighted least-squares beta; projected to rank r when requested.
Matrix mstep_update_beta(const ModelParams& theta, const VariationalParams& xi, const MultiStudyDataset& data,
                         std::optional<int> rank,
                         const kernels::KernelSet& kernels = kernels::KernelSet(Backend::Parallel, 1));

Vector mstep_update_lambda(const ModelParams& theta, const VariationalParams& xi, const MultiStudyDataset& data,
                           const kernels::KernelSet& kernels = kernels::KernelSet(Backend::Parallel, 1));

/// Rotates A and every B_s so their Gram matrices are diagonal and
/// nonincreasing, with the first non-negligible entry of each column
/// positive; factor means and covariances are rotated to match.
std::pair<ModelParams, VariationalParams> apply_identifiability(ModelParams theta, VariationalParams xi);

std::pair<ModelParams, VariationalParams> init_params(const MultiStudyDataset& data, const FitConfig& config);

/// Variational EM. Throws on invalid inputs or numerical failure; running out
/// of iterations only clears FitResult::converged.
FitResult fit(const MultiStudyDataset& data, const FitConfig& config);

}  // namespace multicoap
