#include <cmath>
#include <sstream>

#include "multicoap/error.hpp"
#include "multicoap/linalg.hpp"
#include "multicoap/rrr.hpp"
#include "multicoap/vem.hpp"

namespace multicoap {

namespace {

Matrix solve_normal_equations(const Matrix& rhs, const Matrix& gram, const char* block) {
  try {
    return linalg::spd_solve_right(rhs, gram, block);
  } catch (const NumericalError&) {
    throw NumericalError(NumericalErrorKind::SingularNormalEquations,
                         std::string("normal equations for ") + block +
                             " are singular; the factor count likely exceeds the effective rank of the data, "
                             "try a smaller q or q_s");
  }
}

}  // namespace

Loadings mstep_update_loadings(const ModelParams& theta, const VariationalParams& xi,
                               const MultiStudyDataset& data, const kernels::KernelSet& kernels) {
  const Index p = data.p();
  const Index q = theta.q();
  const std::size_t S = data.num_studies();
  const Matrix none(p, 0);

  // Every study enters the shared-loading normal equations with weight 1/lambda_s.
  Matrix gram = Matrix::Zero(q, q);
  Matrix rhs = Matrix::Zero(p, q);
  Matrix offset;
  Matrix cross;
  for (std::size_t s = 0; s < S; ++s) {
    const StudyData& st = data.study(s);
    const StudyPosterior& post = xi.studies[s];
    const double w = 1.0 / theta.lambda(static_cast<Index>(s));
    const auto n = static_cast<double>(data.n(s));
    gram += w * (post.Mf.transpose() * post.Mf + n * post.Sf);
    kernels.linear_predictor(st.Z, theta.beta, Matrix(data.n(s), 0), none, post.Mh, theta.B[s], offset);
    kernels.cross_product(post.M - offset, post.Mf, cross);
    rhs += w * cross;
  }

  Loadings out;
  out.A = solve_normal_equations(rhs, gram, "shared loadings A");
  out.B.resize(S);
  for (std::size_t s = 0; s < S; ++s) {
    const StudyData& st = data.study(s);
    const StudyPosterior& post = xi.studies[s];
    const auto n = static_cast<double>(data.n(s));
    const Matrix gram_s = post.Mh.transpose() * post.Mh + n * post.Sh;
    kernels.linear_predictor(st.Z, theta.beta, post.Mf, out.A, Matrix(data.n(s), 0), none, offset);
    kernels.cross_product(post.M - offset, post.Mh, cross);
    out.B[s] = solve_normal_equations(cross, gram_s, "study-specific loadings B_s");
  }
  return out;
}

Matrix mstep_update_beta(const ModelParams& theta, const VariationalParams& xi, const MultiStudyDataset& data,
                         std::optional<int> rank, const kernels::KernelSet& kernels) {
  const Index d = data.d();
  const Index p = data.p();
  Matrix zwz = Matrix::Zero(d, d);
  Matrix zwy = Matrix::Zero(p, d);  // (Z^T W Ybar)^T
  Matrix offset;
  Matrix cross;
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const StudyData& st = data.study(s);
    const StudyPosterior& post = xi.studies[s];
    const double w = 1.0 / theta.lambda(static_cast<Index>(s));
    kernels.linear_predictor(Matrix(data.n(s), 0), Matrix(p, 0), post.Mf, theta.A, post.Mh, theta.B[s], offset);
    kernels.cross_product(post.M - offset, st.Z, cross);
    zwy += w * cross;
    zwz += w * (st.Z.transpose() * st.Z);
  }
  const double cond = linalg::condition_number_spd(zwz);
  if (!(cond < 1e12)) {
    std::ostringstream msg;
    msg << "covariates are collinear: condition number of the weighted Z^T Z is " << cond;
    throw NumericalError(NumericalErrorKind::CollinearCovariates, msg.str());
  }
  Matrix beta_tilde = linalg::spd_solve_right(zwy, zwz, "covariate Gram matrix");
  if (!rank || *rank >= std::min(p, d)) return beta_tilde;
  return reduced_rank_beta(beta_tilde, zwz / static_cast<double>(data.total_n()), *rank);
}

Vector mstep_update_lambda(const ModelParams& theta, const VariationalParams& xi, const MultiStudyDataset& data,
                           const kernels::KernelSet& kernels) {
  const std::size_t S = data.num_studies();
  const Matrix AtA = theta.A.transpose() * theta.A;
  Vector lambda(static_cast<Index>(S));
  Matrix predictor;
  for (std::size_t s = 0; s < S; ++s) {
    const StudyData& st = data.study(s);
    const StudyPosterior& post = xi.studies[s];
    const auto n = static_cast<double>(data.n(s));
    kernels.linear_predictor(st.Z, theta.beta, post.Mf, theta.A, post.Mh, theta.B[s], predictor);
    const double residual = kernels.residual_energy(post.M, predictor, post.V);
    const Matrix BtB = theta.B[s].transpose() * theta.B[s];
    const double loading_var = n * ((post.Sf * AtA).trace() + (post.Sh * BtB).trace());
    lambda(static_cast<Index>(s)) = (residual + loading_var) / (n * static_cast<double>(data.p()));
  }
  return lambda;
}

}  // namespace multicoap
