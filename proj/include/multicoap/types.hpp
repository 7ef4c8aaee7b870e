#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace multicoap {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using Index = Eigen::Index;

/// One study: n_s x p counts, n_s x d covariates, n_s normalization factors.
struct StudyData {
  CountMatrix X;
  Matrix Z;
  Vector a;
};

/// Checks every StudyData and cross-study invariant. Throws DataError naming
/// the offending study (1-based) and axis.
void validate_dataset(std::span<const StudyData> studies);

/// Validated, immutable collection of studies sharing p variables and d covariates.
class MultiStudyDataset {
 public:
  explicit MultiStudyDataset(std::vector<StudyData> studies);

  const std::vector<StudyData>& studies() const noexcept { return studies_; }
  const StudyData& study(std::size_t s) const { return studies_.at(s); }
  /// Counts of study s as doubles, cached at construction.
  const Matrix& counts(std::size_t s) const { return counts_.at(s); }

  std::size_t num_studies() const noexcept { return studies_.size(); }
  Index p() const noexcept { return p_; }
  Index d() const noexcept { return d_; }
  Index n(std::size_t s) const { return studies_.at(s).X.rows(); }
  Index total_n() const noexcept;

 private:
  std::vector<StudyData> studies_;
  std::vector<Matrix> counts_;
  Index p_ = 0;
  Index d_ = 0;
};

void validate_dataset(const MultiStudyDataset& data);

/// Model parameters theta = (beta, A, {B_s}, {lambda_s}).
struct ModelParams {
  Matrix beta;            // p x d
  Matrix A;               // p x q
  std::vector<Matrix> B;  // S entries, p x q_s
  Vector lambda;          // S

  Index q() const noexcept { return A.cols(); }
  Index qs(std::size_t s) const { return B.at(s).cols(); }

  /// Shape and positivity checks against a dataset; throws ConfigError.
  void validate(const MultiStudyDataset& data) const;
};

/// Variational posterior of one study. Sf/Sh are shared by every row of the
/// study because they depend only on (A, lambda_s) and (B_s, lambda_s).
struct StudyPosterior {
  Matrix M;   // n_s x p, means of y
  Matrix V;   // n_s x p, variances of y
  Matrix Mf;  // n_s x q
  Matrix Sf;  // q x q
  Matrix Mh;  // n_s x q_s
  Matrix Sh;  // q_s x q_s
};

struct VariationalParams {
  std::vector<StudyPosterior> studies;

  /// sigma^2 > 0, Sf/Sh symmetric positive definite, shapes match.
  void validate(const MultiStudyDataset& data, const ModelParams& theta) const;
};

enum class Backend {
  Parallel,   // OpenMP kernels
  Reference,  // serial reference kernels
};

struct FitConfig {
  int q = 1;
  std::vector<int> qs;
  std::optional<int> rank;
  int max_iter = 200;
  double eps = 1e-5;
  std::uint64_t seed = 1;
  int threads = 1;
  Backend backend = Backend::Parallel;
  /// Parameter-expanded step after the factor update: fit the factor prior
  /// covariance, then fold it back into the loadings.
  bool parameter_expansion = true;

  /// Throws ConfigError; enforces q >= 1, p - 1 > q + q_s and rank <= min(p, d).
  void validate(const MultiStudyDataset& data) const;
};

struct FitResult {
  ModelParams params;
  VariationalParams vparams;
  /// ELBO after every cycle; the last entry is the ELBO of (params, vparams).
  std::vector<double> elbo_trace;
  double initial_elbo = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Frobenius norm of A^T B_s per study; reported, not enforced.
  std::vector<double> cross_block_overlap;
  double seconds = 0.0;
};

}  // namespace multicoap
