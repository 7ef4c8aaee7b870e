#include "multicoap/linalg.hpp"
#include "multicoap/vem.hpp"

namespace multicoap {

namespace {

// Orthogonal R such that (L R)^T (L R) is diagonal and nonincreasing and the
// first entry above 1e-10 in each column of L R is positive. Being orthogonal,
// R leaves the N(0, I) factor prior and hence the ELBO unchanged.
Matrix canonical_rotation(const Matrix& L) {
  if (L.cols() == 0) return Matrix(0, 0);
  Eigen::JacobiSVD<Matrix> svd(L, Eigen::ComputeFullV);
  Matrix R = svd.matrixV();
  Matrix rotated = L * R;
  const Vector signs = linalg::fix_column_signs(rotated);
  return R * signs.asDiagonal();
}

void rotate_block(Matrix& L, Matrix& M, Matrix& S) {
  if (L.cols() == 0) return;
  const Matrix R = canonical_rotation(L);
  L = L * R;
  M = M * R;
  const Matrix rotated = R.transpose() * S * R;
  S = 0.5 * (rotated + rotated.transpose());
}

}  // namespace

std::pair<ModelParams, VariationalParams> apply_identifiability(ModelParams theta, VariationalParams xi) {
  if (theta.A.cols() > 0) {
    const Matrix R = canonical_rotation(theta.A);
    theta.A = theta.A * R;
    for (auto& post : xi.studies) {
      post.Mf = post.Mf * R;
      const Matrix rotated = R.transpose() * post.Sf * R;
      post.Sf = 0.5 * (rotated + rotated.transpose());
    }
  }
  for (std::size_t s = 0; s < theta.B.size(); ++s) {
    auto& post = xi.studies[s];
    rotate_block(theta.B[s], post.Mh, post.Sh);
  }
  return {std::move(theta), std::move(xi)};
}

}  // namespace multicoap
