#pragma once

#include <string_view>

#include "multicoap/types.hpp"

namespace multicoap::linalg {

/// Inverse of a symmetric positive-definite matrix via Cholesky. On failure a
/// jitter of 1e-10 * trace / dim is added and the factorization retried once.
Matrix spd_inverse(const Matrix& S, std::string_view what);

/// rhs * G^{-1} for SPD G, with the same jitter-and-retry policy.
Matrix spd_solve_right(const Matrix& rhs, const Matrix& G, std::string_view what);

/// log |S| for SPD S (0 for an empty matrix).
double log_det_spd(const Matrix& S);

/// Eigen-decomposition of a symmetric matrix, eigenvalues nonincreasing.
/// Ties are broken by the lower original index.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen sorted_symmetric_eigen(const Matrix& S);

/// Largest-to-smallest eigenvalue ratio of a symmetric PSD matrix (inf if singular).
double condition_number_spd(const Matrix& S);

/// Flips column signs so the first entry of magnitude > tol is positive.
/// Returns the applied signs (+1/-1) per column.
Vector fix_column_signs(Matrix& L, double tol = 1e-10);

}  // namespace multicoap::linalg
