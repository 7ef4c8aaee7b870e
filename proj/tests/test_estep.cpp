#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <random>

#include "multicoap/vem.hpp"
#include "oracle.hpp"

using namespace multicoap;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Coordinate pattern search: a derivative-free maximizer that knows nothing
// about the closed form being tested.
double pattern_search(const std::function<double(const Vector&)>& f, Vector x, double step, double min_step) {
  double best = f(x);
  while (step > min_step) {
    bool improved = false;
    for (Index k = 0; k < x.size(); ++k) {
      for (double dir : {1.0, -1.0}) {
        Vector probe = x;
        probe(k) += dir * step;
        const double v = f(probe);
        if (v > best) {
          best = v;
          x = probe;
          improved = true;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
  return best;
}

}  // namespace

TEST(LatentUpdate, UnitCountAtOrigin) {
  const auto m = estep_update_y(1.0, 1.0, 0.0, 0.0, 1.0);
  EXPECT_NEAR(m.mu, 0.0, 1e-15);
  EXPECT_NEAR(m.sigma2, 0.5, 1e-15);
}

TEST(LatentUpdate, ZeroCountAtOrigin) {
  const auto m = estep_update_y(0.0, 1.0, 0.0, 0.0, 1.0);
  EXPECT_NEAR(m.mu, -0.5, 1e-15);
  EXPECT_NEAR(m.sigma2, 1.0 / (std::exp(-0.5) + 1.0), 1e-15);
  EXPECT_NEAR(m.sigma2, 0.62246, 1e-5);
}

TEST(LatentUpdate, IteratesToLogCountWithoutPrior) {
  double y = 0.0;
  for (int k = 0; k < 50; ++k) y = estep_update_y(5.0, 1.0, y, 0.0, kInf).mu;
  EXPECT_NEAR(y, std::log(5.0), 1e-12);
}

TEST(LatentUpdate, MatchesNewtonOracle) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const double x = std::floor(10.0 * (u(gen) + 2.0));
    const double a = std::exp(0.5 * u(gen));
    const double y0 = u(gen);
    const double zt = u(gen);
    const double lambda = 0.3 + std::abs(u(gen));
    const auto got = estep_update_y(x, a, y0, zt, lambda);
    const auto want = oracle::newton_moments(x, a, y0, zt, 1.0 / lambda);
    EXPECT_NEAR(got.mu, want.mu, 1e-12 * std::max(1.0, std::abs(want.mu)));
    EXPECT_NEAR(got.sigma2, want.sigma2, 1e-12 * want.sigma2);
  }
}

TEST(LatentUpdate, ExtremeExpansionPointStaysFinite) {
  const auto m = estep_update_y(3.0, 1.0, 5000.0, 0.0, 1.0);
  EXPECT_TRUE(std::isfinite(m.mu));
  EXPECT_TRUE(std::isfinite(m.sigma2));
  EXPECT_GT(m.sigma2, 0.0);
  const auto big = estep_update_y(1e17, 1.0, 0.0, 0.0, 1.0);
  EXPECT_TRUE(std::isfinite(big.mu));
  EXPECT_GT(big.sigma2, 0.0);
}

TEST(LatentUpdate, WholeDatasetMatchesEntrywiseOracle) {
  const auto inst = oracle::random_instance(8, {});
  VariationalParams xi = inst.xi;
  EStepWorkspace ws(inst.data);
  estep_update_latent(inst.theta, xi, inst.data, ws, kernels::KernelSet(Backend::Parallel, 2));
  for (std::size_t s = 0; s < inst.data.num_studies(); ++s) {
    const auto& st = inst.data.study(s);
    const auto& old = inst.xi.studies[s];
    const Matrix zt = st.Z * inst.theta.beta.transpose() + old.Mf * inst.theta.A.transpose() +
                      old.Mh * inst.theta.B[s].transpose();
    for (Index i = 0; i < st.X.rows(); ++i) {
      for (Index j = 0; j < st.X.cols(); ++j) {
        const auto want = oracle::newton_moments(static_cast<double>(st.X(i, j)), st.a(i), old.M(i, j), zt(i, j),
                                                 1.0 / inst.theta.lambda(static_cast<Index>(s)));
        EXPECT_NEAR(xi.studies[s].M(i, j), want.mu, 1e-12);
        EXPECT_NEAR(xi.studies[s].V(i, j), want.sigma2, 1e-12);
      }
    }
  }
}

TEST(FactorUpdate, ZeroLoadingsGivePriorMoments) {
  auto inst = oracle::random_instance(2, {});
  inst.theta.A.setZero();
  inst.theta.lambda.setOnes();
  const auto fp = estep_update_factors(inst.theta, inst.xi, inst.data, 0);
  EXPECT_NEAR((fp.Sf - Matrix::Identity(1, 1)).norm(), 0.0, 1e-15);
  EXPECT_NEAR(fp.Mf.norm(), 0.0, 1e-15);
}

TEST(FactorUpdate, ScalarCase) {
  StudyData st;
  st.X = CountMatrix::Zero(1, 1);
  st.Z = Matrix::Ones(1, 1);
  st.a = Vector::Ones(1);
  MultiStudyDataset data({st});
  ModelParams theta;
  theta.beta = Matrix::Zero(1, 1);
  theta.A = Matrix::Ones(1, 1);
  theta.B = {Matrix(1, 0)};
  theta.lambda = Vector::Ones(1);
  VariationalParams xi;
  StudyPosterior post;
  post.M = Matrix::Constant(1, 1, 2.0);
  post.V = Matrix::Ones(1, 1);
  post.Mf = Matrix::Zero(1, 1);
  post.Sf = Matrix::Ones(1, 1);
  post.Mh = Matrix(1, 0);
  post.Sh = Matrix(0, 0);
  xi.studies.push_back(post);
  const auto fp = estep_update_factors(theta, xi, data, 0);
  EXPECT_NEAR(fp.Sf(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(fp.Mf(0, 0), 1.0, 1e-15);
}

TEST(FactorUpdate, MatchesRowwiseOracle) {
  oracle::InstanceShape shape;
  shape.n = {6, 4};
  shape.p = 5;
  shape.q = 2;
  shape.qs = {1, 2};
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto inst = oracle::random_instance(seed, shape);
    for (std::size_t s = 0; s < 2; ++s) {
      const auto got = estep_update_factors(inst.theta, inst.xi, inst.data, s);
      const auto want = oracle::factor_block(inst, s);
      EXPECT_LT((got.Sf - want.Sf).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((got.Mf - want.Mf).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((got.Sh - want.Sh).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_LT((got.Mh - want.Mh).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(FactorUpdate, NoDirectSearchImprovesTheSharedBlock) {
  oracle::InstanceShape shape;
  shape.n = {3};
  shape.p = 4;
  shape.q = 2;
  shape.qs = {1};
  const auto base = oracle::random_instance(31, shape);
  auto inst = base;
  const auto fp = estep_update_factors(inst.theta, inst.xi, inst.data, 0);
  inst.xi.studies[0].Mf = fp.Mf;
  inst.xi.studies[0].Sf = fp.Sf;

  const Index n = fp.Mf.rows();
  const Index q = fp.Mf.cols();
  const Matrix L = fp.Sf.llt().matrixL();
  Vector start(n * q + 3);
  start.head(n * q) = Eigen::Map<const Vector>(fp.Mf.data(), n * q);
  start(n * q) = L(0, 0);
  start(n * q + 1) = L(1, 0);
  start(n * q + 2) = L(1, 1);
  auto objective = [&](const Vector& v) {
    auto trial = inst;
    trial.xi.studies[0].Mf = Eigen::Map<const Matrix>(v.data(), n, q);
    Matrix Lt = Matrix::Zero(2, 2);
    Lt(0, 0) = v(n * q);
    Lt(1, 0) = v(n * q + 1);
    Lt(1, 1) = v(n * q + 2);
    trial.xi.studies[0].Sf = Lt * Lt.transpose();
    return oracle::termwise_elbo(trial);
  };
  const double at_update = objective(start);
  const double searched = pattern_search(objective, start, 1e-2, 1e-9);
  EXPECT_LE(searched - at_update, 1e-8);
}
