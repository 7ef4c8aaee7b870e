#include <cmath>
#include <string>

#include "multicoap/error.hpp"
#include "multicoap/kernels.hpp"

namespace multicoap::kernels {

namespace {

double ordered_sum(const Vector& partial) {
  double total = 0.0;
  for (Index j = 0; j < partial.size(); ++j) total += partial(j);
  return total;
}

}  // namespace

void linear_predictor(const Matrix& Z, const Matrix& beta, const Matrix& Mf, const Matrix& A,
                      const Matrix& Mh, const Matrix& B, Matrix& out, Exec exec) {
  const Index n = Z.rows();
  const Index p = beta.rows();
  out.resize(n, p);
#pragma omp parallel for num_threads(exec.threads) schedule(static)
  for (Index j = 0; j < p; ++j) {
    out.col(j).noalias() = Z * beta.row(j).transpose();
    if (A.cols() > 0) out.col(j).noalias() += Mf * A.row(j).transpose();
    if (B.cols() > 0) out.col(j).noalias() += Mh * B.row(j).transpose();
  }
}

void latent_update(const Matrix& X, const Vector& a, const Matrix& ztilde, double inv_lambda, Matrix& M,
                   Matrix& V, Exec exec) {
  const Index n = X.rows();
  const Index p = X.cols();
#pragma omp parallel for num_threads(exec.threads) schedule(static)
  for (Index j = 0; j < p; ++j) {
    for (Index i = 0; i < n; ++i) {
      const auto m = latent_newton_step(X(i, j), a(i), M(i, j), ztilde(i, j), inv_lambda);
      M(i, j) = m.mu;
      V(i, j) = m.sigma2;
    }
  }
}

void project_rows(const Matrix& R, const Matrix& L, const Matrix& S, double scale, Matrix& out, Exec exec) {
  const Index n = R.rows();
  const Matrix LS = scale * (L * S);
  out.resize(n, LS.cols());
  if (LS.cols() == 0) return;
#pragma omp parallel for num_threads(exec.threads) schedule(static)
  for (Index i = 0; i < n; ++i) {
    out.row(i).noalias() = R.row(i) * LS;
  }
}

void cross_product(const Matrix& R, const Matrix& M, Matrix& out, Exec exec) {
  const Index p = R.cols();
  out.resize(p, M.cols());
  if (M.cols() == 0) return;
#pragma omp parallel for num_threads(exec.threads) schedule(static)
  for (Index j = 0; j < p; ++j) {
    out.row(j).noalias() = R.col(j).transpose() * M;
  }
}

double poisson_entropy_sum(const Matrix& X, const Vector& a, const Matrix& M, const Matrix& V,
                           bool keep_constants, Exec exec) {
  const Index n = X.rows();
  const Index p = X.cols();
  Vector partial(p);
  int overflow = 0;
#pragma omp parallel for num_threads(exec.threads) schedule(static) reduction(| : overflow)
  for (Index j = 0; j < p; ++j) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double term = keep_constants
                              ? poisson_entropy_term(X(i, j), a(i), M(i, j), V(i, j))
                              : X(i, j) * M(i, j) - a(i) * std::exp(M(i, j) + 0.5 * V(i, j)) +
                                    0.5 * std::log(V(i, j));
      if (!std::isfinite(term)) overflow = 1;
      acc += term;
    }
    partial(j) = acc;
  }
  if (overflow) {
    throw NumericalError(NumericalErrorKind::NonfiniteElbo,
                         "ELBO is not finite: a Poisson term overflowed");
  }
  return ordered_sum(partial);
}

double residual_energy(const Matrix& M, const Matrix& ztilde, const Matrix& V, Exec exec) {
  const Index n = M.rows();
  const Index p = M.cols();
  Vector partial(p);
#pragma omp parallel for num_threads(exec.threads) schedule(static)
  for (Index j = 0; j < p; ++j) {
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
      const double r = M(i, j) - ztilde(i, j);
      acc += r * r + V(i, j);
    }
    partial(j) = acc;
  }
  return ordered_sum(partial);
}

void KernelSet::linear_predictor(const Matrix& Z, const Matrix& beta, const Matrix& Mf, const Matrix& A,
                                 const Matrix& Mh, const Matrix& B, Matrix& out) const {
  if (backend_ == Backend::Reference) return reference::linear_predictor(Z, beta, Mf, A, Mh, B, out);
  kernels::linear_predictor(Z, beta, Mf, A, Mh, B, out, exec_);
}

void KernelSet::latent_update(const Matrix& X, const Vector& a, const Matrix& ztilde, double inv_lambda,
                              Matrix& M, Matrix& V) const {
  if (backend_ == Backend::Reference) return reference::latent_update(X, a, ztilde, inv_lambda, M, V);
  kernels::latent_update(X, a, ztilde, inv_lambda, M, V, exec_);
}

void KernelSet::project_rows(const Matrix& R, const Matrix& L, const Matrix& S, double scale,
                             Matrix& out) const {
  if (backend_ == Backend::Reference) return reference::project_rows(R, L, S, scale, out);
  kernels::project_rows(R, L, S, scale, out, exec_);
}

void KernelSet::cross_product(const Matrix& R, const Matrix& M, Matrix& out) const {
  if (backend_ == Backend::Reference) return reference::cross_product(R, M, out);
  kernels::cross_product(R, M, out, exec_);
}

double KernelSet::poisson_entropy_sum(const Matrix& X, const Vector& a, const Matrix& M, const Matrix& V,
                                      bool keep_constants) const {
  if (backend_ == Backend::Reference) return reference::poisson_entropy_sum(X, a, M, V, keep_constants);
  return kernels::poisson_entropy_sum(X, a, M, V, keep_constants, exec_);
}

double KernelSet::residual_energy(const Matrix& M, const Matrix& ztilde, const Matrix& V) const {
  if (backend_ == Backend::Reference) return reference::residual_energy(M, ztilde, V);
  return kernels::residual_energy(M, ztilde, V, exec_);
}

}  // namespace multicoap::kernels
