#include "multicoap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "multicoap/error.hpp"
#include "multicoap/linalg.hpp"

namespace multicoap {

double trace_statistic(const Matrix& D_hat, const Matrix& D) {
  if (D_hat.rows() != D.rows()) throw ConfigError("trace statistic: row counts differ");
  const double denom = D.squaredNorm();
  if (denom == 0.0) return 1.0;
  if (D_hat.cols() == 0) return 0.0;
  const Matrix gram = D_hat.transpose() * D_hat;
  const double cond = linalg::condition_number_spd(gram);
  if (!(cond <= 1e12)) {
    std::ostringstream msg;
    msg << "trace statistic: estimate is rank deficient (condition number of D_hat^T D_hat is " << cond << ")";
    throw NumericalError(NumericalErrorKind::RankDeficientEstimate, msg.str());
  }
  const Matrix cross = D_hat.transpose() * D;  // k_hat x k
  const Matrix solved = gram.llt().solve(cross);
  const double num = (cross.transpose() * solved).trace();
  return std::clamp(num / denom, 0.0, 1.0);
}

double beta_error(const Matrix& beta_hat, const Matrix& beta0) {
  if (beta_hat.rows() != beta0.rows() || beta_hat.cols() != beta0.cols()) {
    throw ConfigError("beta error: shapes differ");
  }
  return std::sqrt((beta_hat - beta0).squaredNorm() / static_cast<double>(beta0.size()));
}

ScoreReport score(const FitResult& fit, const SimTruth& truth) {
  const std::size_t S = truth.B0.size();
  if (fit.params.B.size() != S || fit.vparams.studies.size() != S) {
    throw ConfigError("score: fit and truth have different study counts");
  }
  ScoreReport out;
  out.A_tr = trace_statistic(fit.params.A, truth.A0);
  out.beta_er = beta_error(fit.params.beta, truth.beta0);
  const auto p = fit.params.A.rows();
  for (std::size_t s = 0; s < S; ++s) {
    out.B_tr_study.push_back(trace_statistic(fit.params.B[s], truth.B0[s]));
    out.F_tr_study.push_back(trace_statistic(fit.vparams.studies[s].Mf, truth.F[s]));
    out.H_tr_study.push_back(trace_statistic(fit.vparams.studies[s].Mh, truth.H[s]));
    const auto n = truth.F[s].rows();
    out.F_baseline += static_cast<double>(truth.F[s].cols()) / static_cast<double>(std::min(n, p));
  }
  const auto mean = [S](const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(S);
  };
  out.B_tr = mean(out.B_tr_study);
  out.F_tr = mean(out.F_tr_study);
  out.H_tr = mean(out.H_tr_study);
  out.F_baseline /= static_cast<double>(S);
  out.F_near_baseline = out.F_tr <= 2.0 * out.F_baseline;
  return out;
}

}  // namespace multicoap
