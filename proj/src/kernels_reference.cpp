#include <cmath>

#include "multicoap/error.hpp"
#include "multicoap/kernels.hpp"

namespace multicoap::kernels::reference {

void linear_predictor(const Matrix& Z, const Matrix& beta, const Matrix& Mf, const Matrix& A,
                      const Matrix& Mh, const Matrix& B, Matrix& out) {
  const Index n = Z.rows();
  const Index p = beta.rows();
  out.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < p; ++j) {
      double acc = 0.0;
      for (Index k = 0; k < Z.cols(); ++k) acc += Z(i, k) * beta(j, k);
      for (Index k = 0; k < A.cols(); ++k) acc += Mf(i, k) * A(j, k);
      for (Index k = 0; k < B.cols(); ++k) acc += Mh(i, k) * B(j, k);
      out(i, j) = acc;
    }
  }
}

void latent_update(const Matrix& X, const Vector& a, const Matrix& ztilde, double inv_lambda, Matrix& M,
                   Matrix& V) {
  for (Index i = 0; i < X.rows(); ++i) {
    for (Index j = 0; j < X.cols(); ++j) {
      const auto m = latent_newton_step(X(i, j), a(i), M(i, j), ztilde(i, j), inv_lambda);
      M(i, j) = m.mu;
      V(i, j) = m.sigma2;
    }
  }
}

void project_rows(const Matrix& R, const Matrix& L, const Matrix& S, double scale, Matrix& out) {
  const Index n = R.rows();
  const Index p = R.cols();
  const Index k = L.cols();
  out = Matrix::Zero(n, S.cols());
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < S.cols(); ++c) {
      double acc = 0.0;
      for (Index l = 0; l < k; ++l) {
        double rl = 0.0;
        for (Index j = 0; j < p; ++j) rl += R(i, j) * L(j, l);
        acc += rl * S(l, c);
      }
      out(i, c) = scale * acc;
    }
  }
}

void cross_product(const Matrix& R, const Matrix& M, Matrix& out) {
  out = Matrix::Zero(R.cols(), M.cols());
  for (Index j = 0; j < R.cols(); ++j) {
    for (Index k = 0; k < M.cols(); ++k) {
      double acc = 0.0;
      for (Index i = 0; i < R.rows(); ++i) acc += R(i, j) * M(i, k);
      out(j, k) = acc;
    }
  }
}

double poisson_entropy_sum(const Matrix& X, const Vector& a, const Matrix& M, const Matrix& V,
                           bool keep_constants) {
  double total = 0.0;
  for (Index j = 0; j < X.cols(); ++j) {
    for (Index i = 0; i < X.rows(); ++i) {
      const double term = keep_constants
                              ? poisson_entropy_term(X(i, j), a(i), M(i, j), V(i, j))
                              : X(i, j) * M(i, j) - a(i) * std::exp(M(i, j) + 0.5 * V(i, j)) +
                                    0.5 * std::log(V(i, j));
      if (!std::isfinite(term)) {
        throw NumericalError(NumericalErrorKind::NonfiniteElbo, "ELBO is not finite: a Poisson term overflowed");
      }
      total += term;
    }
  }
  return total;
}

double residual_energy(const Matrix& M, const Matrix& ztilde, const Matrix& V) {
  double total = 0.0;
  for (Index j = 0; j < M.cols(); ++j) {
    for (Index i = 0; i < M.rows(); ++i) {
      const double r = M(i, j) - ztilde(i, j);
      total += r * r + V(i, j);
    }
  }
  return total;
}

}  // namespace multicoap::kernels::reference
