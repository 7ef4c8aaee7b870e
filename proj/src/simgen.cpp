#include "multicoap/simgen.hpp"

#include <cmath>
#include <string>

#include "multicoap/error.hpp"
#include "multicoap/linalg.hpp"
#include "multicoap/random.hpp"

namespace multicoap {

namespace {

// rho * U Lambda from the thin SVD of G, first non-negligible entry of each U column positive.
Matrix scaled_left_factor(const Matrix& G, double rho) {
  Eigen::JacobiSVD<Matrix> svd(G, Eigen::ComputeThinU);
  Matrix U = svd.matrixU();
  linalg::fix_column_signs(U);
  return rho * U * svd.singularValues().asDiagonal();
}

Matrix ar1_cholesky(Index dim) {
  Matrix cov(dim, dim);
  for (Index k = 0; k < dim; ++k) {
    for (Index l = 0; l < dim; ++l) cov(k, l) = std::pow(0.5, static_cast<double>(std::abs(k - l)));
  }
  return Eigen::LLT<Matrix>(cov).matrixL();
}

}  // namespace

void SimConfig::validate() const {
  if (n.empty()) throw ConfigError("simulation needs at least one study");
  if (qs.size() != n.size()) throw ConfigError("simulation: qs must list one value per study");
  for (int ns : n) {
    if (ns < 1) throw ConfigError("simulation: every n_s must be positive");
  }
  for (int k : qs) {
    if (k < 1) throw ConfigError("simulation: every q_s must be positive");
  }
  if (p < 1 || d < 1 || q < 1) throw ConfigError("simulation: p, d and q must be positive");
  if (r0 < 1 || r0 > std::min(p, d)) throw ConfigError("simulation: r0 must lie in [1, min(p, d)]");
  if (q + qs.front() > p) throw ConfigError("simulation: q + q_1 must not exceed p");
  if (rho_a < 0.0 || rho_b < 0.0 || rho_z < 0.0) throw ConfigError("simulation: signal strengths must be >= 0");
  if (sigma0_sq < 0.0) throw ConfigError("simulation: sigma0_sq must be >= 0");
  if (a_range[0] < 1 || a_range[0] > a_range[1]) throw ConfigError("simulation: a_range must satisfy 1 <= a <= b");
}

SimStructure generate_structure(const SimConfig& config) {
  config.validate();
  Rng rng(config.structure_seed);
  SimStructure out;
  const Matrix U0 = rng.normal_matrix(config.d, config.r0);
  const Matrix V0 = rng.normal_matrix(config.p, config.r0);
  out.beta0 = 4.0 * config.rho_z * V0 * U0.transpose() / static_cast<double>(config.p);

  const int q1 = config.qs.front();
  const Matrix joint = scaled_left_factor(rng.normal_matrix(config.p, config.q + q1), config.rho_a);
  out.A0 = joint.leftCols(config.q);
  out.B0.push_back(joint.rightCols(q1));
  for (std::size_t s = 1; s < config.n.size(); ++s) {
    out.B0.push_back(scaled_left_factor(rng.normal_matrix(config.p, config.qs[s]), config.rho_b));
  }
  return out;
}

std::pair<MultiStudyDataset, SimTruth> generate(const SimConfig& config) {
  SimStructure structure = generate_structure(config);
  Rng rng(config.seed);
  const Index p = config.p;
  const Index d = config.d;
  const Matrix chol = d > 1 ? ar1_cholesky(d - 1) : Matrix(0, 0);
  const double sigma0 = std::sqrt(config.sigma0_sq);

  SimTruth truth;
  truth.sigma0_sq = config.sigma0_sq;
  std::vector<StudyData> studies;
  for (std::size_t s = 0; s < config.n.size(); ++s) {
    const Index n = config.n[s];
    StudyData st;
    st.Z.resize(n, d);
    st.Z.col(0).setOnes();
    if (d > 1) st.Z.rightCols(d - 1) = rng.normal_matrix(n, d - 1) * chol.transpose();
    Matrix F = rng.normal_matrix(n, config.q);
    Matrix H = rng.normal_matrix(n, config.qs[s]);
    const Matrix noise = sigma0 * rng.normal_matrix(n, p);
    st.a.resize(n);
    for (Index i = 0; i < n; ++i) {
      st.a(i) = static_cast<double>(rng.uniform_int(config.a_range[0], config.a_range[1]));
    }
    const Matrix log_rate = st.Z * structure.beta0.transpose() + F * structure.A0.transpose() +
                            H * structure.B0[s].transpose() + noise;
    st.X.resize(n, p);
    for (Index j = 0; j < p; ++j) {
      for (Index i = 0; i < n; ++i) {
        double rate = st.a(i) * std::exp(log_rate(i, j));
        if (!(rate <= kMaxSimulatedRate) && config.censor_rates && !std::isnan(rate)) {
          rate = kMaxSimulatedRate;
          ++truth.censored;
        }
        if (!(rate <= kMaxSimulatedRate)) {
          throw NumericalError(NumericalErrorKind::SignalTooStrong,
                               "simulated Poisson rate " + std::to_string(rate) + " at study " +
                                   std::to_string(s + 1) + ", row " + std::to_string(i + 1) + ", column " +
                                   std::to_string(j + 1) + " is too large; reduce the signal strengths");
        }
        st.X(i, j) = rng.poisson(rate);
      }
    }
    truth.F.push_back(std::move(F));
    truth.H.push_back(std::move(H));
    studies.push_back(std::move(st));
  }
  truth.beta0 = std::move(structure.beta0);
  truth.A0 = std::move(structure.A0);
  truth.B0 = std::move(structure.B0);
  return {MultiStudyDataset(std::move(studies)), std::move(truth)};
}

}  // namespace multicoap
