#include <gtest/gtest.h>

#include <cmath>

#include "multicoap/linalg.hpp"
#include "multicoap/metrics.hpp"
#include "multicoap/simgen.hpp"
#include "multicoap/vem.hpp"
#include "oracle.hpp"

using namespace multicoap;

namespace {

std::pair<MultiStudyDataset, SimTruth> small_example(std::uint64_t seed) {
  SimConfig sim;
  sim.n = {50, 80};
  sim.p = 40;
  sim.seed = seed;
  sim.structure_seed = 3;
  return generate(sim);
}

FitConfig example_config() {
  FitConfig config;
  config.q = 3;
  config.qs = {2, 2};
  config.rank = 2;
  return config;
}

void expect_monotone(const FitResult& res) {
  double prev = res.initial_elbo;
  for (double e : res.elbo_trace) {
    EXPECT_GE(e, prev - 1e-6 * std::abs(prev));
    prev = e;
  }
}

}  // namespace

TEST(Fit, ElboIsMonotone) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto [data, truth] = small_example(seed);
    expect_monotone(fit(data, example_config()));
  }
}

TEST(Fit, ElboIsMonotoneWithoutParameterExpansion) {
  const auto [data, truth] = small_example(4);
  FitConfig config = example_config();
  config.parameter_expansion = false;
  config.max_iter = 60;
  expect_monotone(fit(data, config));
}

TEST(Fit, FinalTraceEntryIsTheReturnedElbo) {
  const auto [data, truth] = small_example(5);
  const auto res = fit(data, example_config());
  ASSERT_EQ(res.elbo_trace.size(), static_cast<std::size_t>(res.iterations) + 1);
  EXPECT_NEAR(res.elbo_trace.back(), elbo(res.params, res.vparams, data), 1e-12 * std::abs(res.elbo_trace.back()));
}

TEST(Fit, PosteriorCovariancesMatchFinalParameters) {
  const auto [data, truth] = small_example(6);
  const auto res = fit(data, example_config());
  const Matrix& A = res.params.A;
  for (std::size_t s = 0; s < data.num_studies(); ++s) {
    const double lambda = res.params.lambda(static_cast<Index>(s));
    const Matrix Sf = (A.transpose() * A / lambda + Matrix::Identity(A.cols(), A.cols())).inverse();
    EXPECT_LT((res.vparams.studies[s].Sf - Sf).cwiseAbs().maxCoeff(), 1e-10);
    const Matrix& B = res.params.B[s];
    const Matrix Sh = (B.transpose() * B / lambda + Matrix::Identity(B.cols(), B.cols())).inverse();
    EXPECT_LT((res.vparams.studies[s].Sh - Sh).cwiseAbs().maxCoeff(), 1e-10);
  }
  EXPECT_NO_THROW(res.vparams.validate(data, res.params));
}

TEST(Fit, IsDeterministic) {
  const auto [data, truth] = small_example(7);
  const auto a = fit(data, example_config());
  const auto b = fit(data, example_config());
  EXPECT_EQ(a.elbo_trace, b.elbo_trace);
  EXPECT_EQ(a.params.A, b.params.A);
  EXPECT_EQ(a.params.beta, b.params.beta);
  EXPECT_EQ(a.vparams.studies[1].M, b.vparams.studies[1].M);
}

TEST(Fit, ThreadCountDoesNotChangeBits) {
  const auto [data, truth] = small_example(8);
  FitConfig config = example_config();
  config.max_iter = 40;
  const auto one = fit(data, config);
  config.threads = 4;
  const auto four = fit(data, config);
  EXPECT_EQ(one.elbo_trace, four.elbo_trace);
  EXPECT_EQ(one.params.A, four.params.A);
  EXPECT_EQ(one.params.B[0], four.params.B[0]);
  EXPECT_EQ(one.params.beta, four.params.beta);
}

TEST(Fit, ReferenceBackendAgrees) {
  const auto [data, truth] = small_example(9);
  FitConfig config = example_config();
  config.max_iter = 30;
  const auto par = fit(data, config);
  config.backend = Backend::Reference;
  const auto ref = fit(data, config);
  ASSERT_EQ(par.elbo_trace.size(), ref.elbo_trace.size());
  EXPECT_NEAR(par.elbo_trace.back(), ref.elbo_trace.back(), 1e-9 * std::abs(ref.elbo_trace.back()));
  EXPECT_LT((par.params.beta - ref.params.beta).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Fit, ImprovesOnInitialization) {
  const auto [data, truth] = small_example(10);
  const auto res = fit(data, example_config());
  EXPECT_LT(res.initial_elbo, res.elbo_trace.back());
}

TEST(Fit, ConvergesOnExampleOneData) {
  SimConfig sim;
  sim.seed = 11;
  const auto [data, truth] = generate(sim);
  const auto res = fit(data, example_config());
  EXPECT_TRUE(res.converged);
  EXPECT_LE(res.iterations, 200);
  const auto sc = score(res, truth);
  EXPECT_GT(sc.A_tr, 0.9);
}

TEST(Fit, RunningOutOfIterationsIsNotAnError) {
  const auto [data, truth] = small_example(12);
  FitConfig config = example_config();
  config.max_iter = 2;
  const auto res = fit(data, config);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 2);
}

TEST(Fit, AllowsStudiesWithoutSpecificFactors) {
  const auto [data, truth] = small_example(13);
  FitConfig config = example_config();
  config.qs = {0, 2};
  const auto res = fit(data, config);
  EXPECT_EQ(res.params.B[0].cols(), 0);
  expect_monotone(res);
}

TEST(Fit, NullSignalGivesUnitScaleVariance) {
  SimConfig sim;
  sim.rho_a = 0.0;
  sim.rho_b = 0.0;
  sim.rho_z = 0.0;
  sim.sigma0_sq = 1.0;
  sim.seed = 14;
  const auto [data, truth] = generate(sim);
  const auto res = fit(data, example_config());
  for (Index s = 0; s < res.params.lambda.size(); ++s) {
    EXPECT_GE(res.params.lambda(s), 0.5);
    EXPECT_LE(res.params.lambda(s), 2.0);
  }
  const auto sc = score(res, truth);
  EXPECT_TRUE(std::isfinite(sc.A_tr));
  EXPECT_TRUE(std::isfinite(sc.F_tr));
  EXPECT_TRUE(std::isfinite(sc.B_tr));
  EXPECT_TRUE(std::isfinite(sc.H_tr));
}

TEST(Init, ZeroCountsGiveZeroStart) {
  StudyData st;
  st.X = CountMatrix::Zero(8, 6);
  st.Z = Matrix::Ones(8, 2);
  st.Z.col(1).setLinSpaced(-1.0, 1.0);
  st.a = Vector::Ones(8);
  MultiStudyDataset data({st});
  FitConfig config;
  config.q = 1;
  config.qs = {1};
  const auto [theta, xi] = init_params(data, config);
  EXPECT_EQ(xi.studies[0].M, Matrix::Zero(8, 6));
  EXPECT_LT(theta.beta.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Init, IsDeterministicInTheSeed) {
  const auto [data, truth] = small_example(15);
  const auto [t1, x1] = init_params(data, example_config());
  const auto [t2, x2] = init_params(data, example_config());
  EXPECT_EQ(t1.A, t2.A);
  EXPECT_EQ(t1.B[1], t2.B[1]);
  EXPECT_EQ(x1.studies[0].Mf, x2.studies[0].Mf);
}

TEST(Fit, JensenBoundHoldsOnScalarToy) {
  // p = 1, q = 1, q_s = 0 is below the identifiability bound, so the cycle is
  // driven by hand with the same update operations the fit uses.
  StudyData st;
  st.X = CountMatrix(5, 1);
  st.X << 0, 3, 1, 7, 2;
  st.Z = Matrix::Ones(5, 1);
  st.a = (Vector(5) << 1.0, 1.5, 0.8, 2.0, 1.0).finished();
  MultiStudyDataset data({st});
  ModelParams theta;
  theta.beta = Matrix::Constant(1, 1, 0.5);
  theta.A = Matrix::Constant(1, 1, 0.5);
  theta.B = {Matrix(1, 0)};
  theta.lambda = Vector::Ones(1);
  VariationalParams xi;
  StudyPosterior post;
  post.M = ((data.counts(0).array() + 1.0).colwise() / st.a.array()).log().matrix();
  post.V = Matrix::Ones(5, 1);
  post.Mf = Matrix::Zero(5, 1);
  post.Sf = Matrix::Identity(1, 1);
  post.Mh = Matrix(5, 0);
  post.Sh = Matrix(0, 0);
  xi.studies.push_back(post);
  const kernels::KernelSet k(Backend::Parallel, 1);
  EStepWorkspace ws(data);
  double prev = elbo(theta, xi, data);
  for (int it = 0; it < 300; ++it) {
    estep_update_latent(theta, xi, data, ws, k);
    auto fp = estep_update_factors(theta, xi, data, 0);
    xi.studies[0].Mf = fp.Mf;
    xi.studies[0].Sf = fp.Sf;
    theta.A = mstep_update_loadings(theta, xi, data).A;
    theta.beta = mstep_update_beta(theta, xi, data, std::nullopt);
    theta.lambda = mstep_update_lambda(theta, xi, data);
    const double cur = elbo(theta, xi, data);
    EXPECT_GE(cur, prev - 1e-6 * std::abs(prev));
    EXPECT_NO_THROW(xi.validate(data, theta));
    prev = cur;
  }
  const double bound = elbo(theta, xi, data);
  const double exact = oracle::log_marginal_scalar(data, theta);
  EXPECT_LE(bound, exact + 1e-6);
  EXPECT_NEAR(bound, oracle::termwise_elbo(data, theta, xi), 1e-10 * std::abs(bound));
}
