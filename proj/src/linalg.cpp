#include "multicoap/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "multicoap/error.hpp"

namespace multicoap::linalg {

namespace {

Eigen::LLT<Matrix> factorize(const Matrix& S, std::string_view what) {
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() == Eigen::Success) return llt;
  const double dim = static_cast<double>(std::max<Index>(S.rows(), 1));
  const double jitter = 1e-10 * std::abs(S.trace()) / dim;
  Matrix jittered = S;
  jittered.diagonal().array() += jitter;
  llt.compute(jittered);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(NumericalErrorKind::NotPositiveDefinite,
                         std::string(what) + ": matrix is not positive definite");
  }
  return llt;
}

}  // namespace

Matrix spd_inverse(const Matrix& S, std::string_view what) {
  if (S.size() == 0) return Matrix(0, 0);
  auto llt = factorize(S, what);
  Matrix inv = llt.solve(Matrix::Identity(S.rows(), S.cols()));
  return 0.5 * (inv + inv.transpose());
}

Matrix spd_solve_right(const Matrix& rhs, const Matrix& G, std::string_view what) {
  if (G.size() == 0) return Matrix(rhs.rows(), 0);
  auto llt = factorize(G, what);
  // X G = rhs  <=>  G X^T = rhs^T
  return llt.solve(rhs.transpose()).transpose();
}

double log_det_spd(const Matrix& S) {
  if (S.size() == 0) return 0.0;
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) {
    throw NumericalError(NumericalErrorKind::NotPositiveDefinite, "log-determinant of a non-SPD matrix");
  }
  const Matrix& L = llt.matrixLLT();
  return 2.0 * L.diagonal().array().log().sum();
}

SymmetricEigen sorted_symmetric_eigen(const Matrix& S) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(S);
  const Vector& ev = es.eigenvalues();
  std::vector<Index> order(static_cast<std::size_t>(ev.size()));
  std::iota(order.begin(), order.end(), Index{0});
  // Eigen returns ascending values; stable sort on descending value keeps the
  // lower index first among exact ties.
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return ev(a) > ev(b); });
  SymmetricEigen out{Vector(ev.size()), Matrix(S.rows(), ev.size())};
  for (std::size_t k = 0; k < order.size(); ++k) {
    out.values(static_cast<Index>(k)) = ev(order[k]);
    out.vectors.col(static_cast<Index>(k)) = es.eigenvectors().col(order[k]);
  }
  return out;
}

double condition_number_spd(const Matrix& S) {
  if (S.size() == 0) return 1.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(S, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

Vector fix_column_signs(Matrix& L, double tol) {
  Vector signs = Vector::Ones(L.cols());
  for (Index k = 0; k < L.cols(); ++k) {
    for (Index j = 0; j < L.rows(); ++j) {
      if (std::abs(L(j, k)) > tol) {
        if (L(j, k) < 0.0) {
          signs(k) = -1.0;
          L.col(k) *= -1.0;
        }
        break;
      }
    }
  }
  return signs;
}

}  // namespace multicoap::linalg
