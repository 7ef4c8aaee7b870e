#include "multicoap/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "multicoap/error.hpp"

namespace multicoap {

namespace {

std::string study_label(std::size_t s) { return "study " + std::to_string(s + 1); }

void check_symmetric_pd(const Matrix& S, const std::string& what) {
  if (S.rows() != S.cols()) throw ConfigError(what + " is not square");
  if (S.size() == 0) return;
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  if ((S - S.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw ConfigError(what + " is not symmetric");
  }
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success) throw ConfigError(what + " is not positive definite");
}

}  // namespace

void validate_dataset(std::span<const StudyData> studies) {
  if (studies.empty()) {
    throw DataError(DataErrorKind::DimensionMismatch, "dataset must contain at least one study");
  }
  const Index p = studies.front().X.cols();
  const Index d = studies.front().Z.cols();
  for (std::size_t s = 0; s < studies.size(); ++s) {
    const StudyData& st = studies[s];
    const Index n = st.X.rows();
    if (st.X.cols() != p) {
      throw DataError(DataErrorKind::DimensionMismatch,
                      study_label(s) + ": counts have " + std::to_string(st.X.cols()) +
                          " columns (variables) but study 1 has " + std::to_string(p));
    }
    if (st.Z.cols() != d) {
      throw DataError(DataErrorKind::DimensionMismatch,
                      study_label(s) + ": covariates have " + std::to_string(st.Z.cols()) +
                          " columns but study 1 has " + std::to_string(d));
    }
    if (st.Z.rows() != n) {
      throw DataError(DataErrorKind::DimensionMismatch,
                      study_label(s) + ": covariates have " + std::to_string(st.Z.rows()) +
                          " rows but counts have " + std::to_string(n));
    }
    if (st.a.size() != n) {
      throw DataError(DataErrorKind::DimensionMismatch,
                      study_label(s) + ": normalization vector has " + std::to_string(st.a.size()) +
                          " rows but counts have " + std::to_string(n));
    }
    if (n == 0 || p == 0) {
      throw DataError(DataErrorKind::DimensionMismatch, study_label(s) + ": empty count matrix");
    }
    for (Index j = 0; j < p; ++j) {
      for (Index i = 0; i < n; ++i) {
        if (st.X(i, j) < 0) {
          throw DataError(DataErrorKind::NegativeCount,
                          study_label(s) + ": negative count at row " + std::to_string(i + 1) +
                              ", column " + std::to_string(j + 1));
        }
      }
    }
    for (Index i = 0; i < n; ++i) {
      if (!(st.a(i) > 0.0) || !std::isfinite(st.a(i))) {
        throw DataError(DataErrorKind::NonpositiveNormalizer,
                        study_label(s) + ": normalization factor at row " + std::to_string(i + 1) +
                            " is not positive");
      }
    }
    if (!st.Z.allFinite()) {
      throw DataError(DataErrorKind::Malformed, study_label(s) + ": covariates contain non-finite values");
    }
  }
}

MultiStudyDataset::MultiStudyDataset(std::vector<StudyData> studies) : studies_(std::move(studies)) {
  validate_dataset(studies_);
  p_ = studies_.front().X.cols();
  d_ = studies_.front().Z.cols();
  counts_.reserve(studies_.size());
  for (const auto& st : studies_) counts_.push_back(st.X.cast<double>());
}

Index MultiStudyDataset::total_n() const noexcept {
  Index total = 0;
  for (const auto& st : studies_) total += st.X.rows();
  return total;
}

void validate_dataset(const MultiStudyDataset& data) { validate_dataset(data.studies()); }

void ModelParams::validate(const MultiStudyDataset& data) const {
  const std::size_t S = data.num_studies();
  if (beta.rows() != data.p() || beta.cols() != data.d()) throw ConfigError("beta must be p x d");
  if (A.rows() != data.p()) throw ConfigError("A must have p rows");
  if (B.size() != S) throw ConfigError("B must hold one matrix per study");
  if (lambda.size() != static_cast<Index>(S)) throw ConfigError("lambda must hold one entry per study");
  for (std::size_t s = 0; s < S; ++s) {
    if (B[s].rows() != data.p()) throw ConfigError("B of " + study_label(s) + " must have p rows");
    if (!(lambda(static_cast<Index>(s)) > 0.0)) {
      throw ConfigError("lambda of " + study_label(s) + " must be positive");
    }
  }
}

void VariationalParams::validate(const MultiStudyDataset& data, const ModelParams& theta) const {
  if (studies.size() != data.num_studies()) throw ConfigError("variational parameters: study count mismatch");
  for (std::size_t s = 0; s < studies.size(); ++s) {
    const StudyPosterior& post = studies[s];
    const Index n = data.n(s);
    const Index p = data.p();
    if (post.M.rows() != n || post.M.cols() != p || post.V.rows() != n || post.V.cols() != p) {
      throw ConfigError("variational parameters of " + study_label(s) + ": M/V must be n_s x p");
    }
    if (post.Mf.rows() != n || post.Mf.cols() != theta.q() || post.Sf.rows() != theta.q()) {
      throw ConfigError("variational parameters of " + study_label(s) + ": Mf/Sf shape mismatch");
    }
    if (post.Mh.rows() != n || post.Mh.cols() != theta.qs(s) || post.Sh.rows() != theta.qs(s)) {
      throw ConfigError("variational parameters of " + study_label(s) + ": Mh/Sh shape mismatch");
    }
    if (!(post.V.array() > 0.0).all()) {
      throw ConfigError("variational parameters of " + study_label(s) + ": sigma^2 must be positive");
    }
    check_symmetric_pd(post.Sf, "Sf of " + study_label(s));
    check_symmetric_pd(post.Sh, "Sh of " + study_label(s));
  }
}

void FitConfig::validate(const MultiStudyDataset& data) const {
  const Index p = data.p();
  if (q < 1) throw ConfigError("q must be at least 1");
  if (qs.size() != data.num_studies()) {
    throw ConfigError("qs must list one value per study (" + std::to_string(data.num_studies()) + ")");
  }
  for (std::size_t s = 0; s < qs.size(); ++s) {
    if (qs[s] < 0) throw ConfigError("qs must be nonnegative");
    if (!(p - 1 > q + qs[s])) {
      throw ConfigError("identifiability requires p-1 > q+q_s; got p=" + std::to_string(p) +
                        ", q=" + std::to_string(q) + ", q_s=" + std::to_string(qs[s]) + " for " +
                        study_label(s));
    }
  }
  if (rank) {
    if (*rank < 1 || *rank > std::min(p, data.d())) {
      throw ConfigError("rank must lie in [1, min(p, d)]");
    }
  }
  if (max_iter < 1) throw ConfigError("max_iter must be positive");
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (threads < 1) throw ConfigError("threads must be positive");
}

}  // namespace multicoap
