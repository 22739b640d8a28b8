#include "mpopi/gaussian.hpp"
#include "mpopi/plan.hpp"
#include "mpopi/rng.hpp"
#include "mpopi/weights.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace mpopi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = nd(rng);
  return a * a.transpose() + 0.5 * MatrixXd::Identity(n, n);
}

}  // namespace

TEST(BlockCovariance, SingleIdentityBlock) {
  std::vector<MatrixXd> blocks{MatrixXd::Identity(2, 2)};
  EXPECT_TRUE(assemble_block_covariance(blocks).isApprox(MatrixXd::Identity(2, 2)));
}

TEST(BlockCovariance, RepeatedDiagonalBlocks) {
  MatrixXd b = Eigen::Vector2d(3.0, 5.0).asDiagonal();
  std::vector<MatrixXd> blocks{b, b};
  VectorXd expect(4);
  expect << 3, 5, 3, 5;
  const MatrixXd full = assemble_block_covariance(blocks);
  EXPECT_EQ(full, MatrixXd(expect.asDiagonal()));
}

TEST(BlockCovariance, CholeskyOfDiagonal) {
  std::vector<MatrixXd> blocks{MatrixXd::Constant(1, 1, 4.0), MatrixXd::Constant(1, 1, 9.0)};
  const auto p = JointProposal::block_diagonal(VectorXd::Zero(2), blocks);
  EXPECT_DOUBLE_EQ(p.cov()(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(p.cov()(1, 1), 9.0);
  EXPECT_DOUBLE_EQ(p.chol()(0, 0), 2.0);
  EXPECT_DOUBLE_EQ(p.chol()(1, 1), 3.0);
  EXPECT_DOUBLE_EQ(p.chol()(1, 0), 0.0);
}

TEST(BlockCovariance, RejectsNonSymmetricAndIndefinite) {
  MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  std::vector<MatrixXd> b1{asym};
  EXPECT_THROW(assemble_block_covariance(b1), CovarianceError);
  MatrixXd indef(2, 2);
  indef << 1, 2, 2, 1;
  std::vector<MatrixXd> b2{indef};
  EXPECT_THROW(assemble_block_covariance(b2), CovarianceError);
}

TEST(LogDensity, StandardNormalAtMode) {
  const auto p = JointProposal::dense(VectorXd::Zero(1), MatrixXd::Identity(1, 1));
  EXPECT_NEAR(p.log_density(VectorXd::Zero(1)), -0.5 * std::log(2 * std::numbers::pi), 1e-14);
}

TEST(LogDensity, ScaledOneDimensional) {
  const auto p = JointProposal::dense(VectorXd::Zero(1), MatrixXd::Constant(1, 1, 4.0));
  const double expect = -0.5 * std::log(2 * std::numbers::pi * 4.0) - 0.5;
  EXPECT_NEAR(p.log_density(VectorXd::Constant(1, 2.0)), expect, 1e-14);
}

TEST(LogDensity, MatchesDirectFormulaOnRandomSpd) {
  std::mt19937_64 rng(7);
  for (int n = 1; n <= 5; ++n) {
    const MatrixXd cov = random_spd(n, rng);
    VectorXd mean = VectorXd::Random(n);
    VectorXd v = VectorXd::Random(n);
    const auto p = JointProposal::dense(mean, cov);
    const VectorXd d = v - mean;
    const double direct = -0.5 * (n * std::log(2 * std::numbers::pi) + std::log(cov.determinant()) +
                                  d.dot(cov.inverse() * d));
    EXPECT_NEAR(p.log_density(v), direct, 1e-10);
  }
}

TEST(Solve, BlockFastPathMatchesDense) {
  std::mt19937_64 rng(3);
  std::vector<MatrixXd> blocks{random_spd(2, rng), random_spd(2, rng), random_spd(2, rng)};
  const auto blocked = JointProposal::block_diagonal(VectorXd::Zero(6), blocks);
  const auto dense = JointProposal::dense(VectorXd::Zero(6), blocked.cov());
  EXPECT_EQ(blocked.block_size(), 2);
  const VectorXd b = VectorXd::Random(6);
  EXPECT_TRUE(blocked.solve(b).isApprox(dense.solve(b), 1e-12));
  EXPECT_TRUE(blocked.solve(b).isApprox(blocked.cov().inverse() * b, 1e-10));
}

TEST(SampleNoise, MarginalMomentsMatchBlocks) {
  MatrixXd b0(2, 2), b1(2, 2);
  b0 << 1.0, 0.3, 0.3, 0.5;
  b1 << 2.0, -0.4, -0.4, 0.8;
  std::vector<MatrixXd> blocks{b0, b1};
  const auto p = JointProposal::block_diagonal(VectorXd::Zero(4), blocks);
  const int K = 100000;
  const MatrixXd eps = p.sample_noise(K, 11);
  const VectorXd mean = eps.rowwise().mean();
  const MatrixXd centered = eps.colwise() - mean;
  const MatrixXd cov = centered * centered.transpose() / (K - 1);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(mean[i], 0.0, 0.05 * std::sqrt(p.cov()(i, i)));
    EXPECT_NEAR(cov(i, i), p.cov()(i, i), 0.05 * p.cov()(i, i));
  }
  EXPECT_NEAR(cov(0, 1), 0.3, 0.05 * std::sqrt(0.5));
  EXPECT_NEAR(cov(2, 3), -0.4, 0.05 * std::sqrt(1.6));
  EXPECT_NEAR(cov(0, 2), 0.0, 0.02);
}

TEST(SampleNoise, ParallelIsBitIdentical) {
  std::mt19937_64 rng(5);
  const auto p = JointProposal::dense(VectorXd::Zero(6), random_spd(6, rng));
  const MatrixXd serial = p.sample_noise(257, 99);
  for (int threads : {1, 2, 4, 7}) {
    EXPECT_EQ(p.sample_noise_parallel(257, 99, threads), serial) << threads;
  }
}

TEST(SampleNoise, ColumnsAreCounterAddressed) {
  const auto p = JointProposal::dense(VectorXd::Zero(3), MatrixXd::Identity(3, 3));
  const MatrixXd a = p.sample_noise(10, 42);
  const MatrixXd b = p.sample_noise(4, 42);
  EXPECT_EQ(a.leftCols(4), b);
  EXPECT_NE(p.sample_noise(4, 43), b);
}

TEST(SampleNoise, DegenerateZeroCovariance) {
  const auto p = JointProposal::dense(VectorXd::Ones(2), MatrixXd::Zero(2, 2));
  EXPECT_TRUE(p.degenerate());
  EXPECT_EQ(p.sample_noise(5, 1), MatrixXd::Zero(2, 5));
}

TEST(Regularize, RepairsNearSingular) {
  MatrixXd c(2, 2);
  c << 1.0, 1.0, 1.0, 1.0;
  const Regularized r = regularize_pd(c);
  EXPECT_GT(r.jitter, 0.0);
  EXPECT_TRUE(try_cholesky(r.cov).has_value());
}

// Monte Carlo check of E_{V~q(U)}[log q(V|U) - log q(V|U~)] = 1/2 (U-U~)' S^-1 (U-U~).
TEST(KlIdentity, SmallInstance) {
  std::mt19937_64 rng(21);
  const int n = 3;
  const MatrixXd cov = random_spd(n, rng);
  const VectorXd u = VectorXd::Random(n);
  const VectorXd ut = VectorXd::Random(n);
  const VectorXd d = u - ut;
  const double oracle = 0.5 * d.dot(cov.inverse() * d);

  const auto q = JointProposal::dense(u, cov);
  const auto qt = JointProposal::dense(ut, cov);
  const int N = 20000;
  const MatrixXd eps = q.sample_noise(N, 8);
  double sum = 0.0, sum2 = 0.0;
  for (int k = 0; k < N; ++k) {
    const VectorXd v = u + eps.col(k);
    const double x = q.log_density(v) - qt.log_density(v);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum2 / N - mean * mean) / N);
  EXPECT_LE(std::abs(mean - oracle), 3.0 * se + 1e-12);
}

TEST(Weights, SumToOneAndPositive) {
  VectorXd c(4);
  c << 3.0, 1.0, 2.0, 10.0;
  const VectorXd w = softmax_weights(c, 0.7);
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
  EXPECT_GT(w.minCoeff(), 0.0);
  EXPECT_LE(w.maxCoeff(), 1.0);
  // hand values
  const double e0 = std::exp(-2.0 / 0.7), e2 = std::exp(-1.0 / 0.7), e3 = std::exp(-9.0 / 0.7);
  const double eta = 1.0 + e0 + e2 + e3;
  EXPECT_NEAR(w[1], 1.0 / eta, 1e-15);
  EXPECT_NEAR(w[0], e0 / eta, 1e-15);
}

TEST(Weights, ShiftInvariantAndSurvivesHugeCosts) {
  VectorXd c(3);
  c << 1e6, 1e6 + 1.0, 1e6 + 2.0;
  const VectorXd w = softmax_weights(c, 1.0);
  const VectorXd w0 = softmax_weights((c.array() - 1e6).matrix(), 1.0);
  EXPECT_TRUE(w.allFinite());
  EXPECT_NEAR((w - w0).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Weights, SingleSampleAndErrors) {
  EXPECT_EQ(softmax_weights(VectorXd::Constant(1, 5.0), 1.0)[0], 1.0);
  EXPECT_THROW(softmax_weights(VectorXd(), 1.0), std::invalid_argument);
  EXPECT_THROW(softmax_weights(VectorXd::Ones(2), 0.0), std::invalid_argument);
  VectorXd bad(3);
  bad << 1.0, std::nan(""), 2.0;
  try {
    softmax_weights(bad, 1.0);
    FAIL();
  } catch (const NonFiniteCostError& e) {
    EXPECT_EQ(e.index(), 1);
  }
}

TEST(Weights, EffectiveSampleSize) {
  EXPECT_NEAR(effective_sample_size(VectorXd::Constant(8, 0.125)), 8.0, 1e-12);
  VectorXd one = VectorXd::Zero(5);
  one[2] = 1.0;
  EXPECT_DOUBLE_EQ(effective_sample_size(one), 1.0);
}

TEST(ControlPlan, ShiftRepeatLastAndZero) {
  VectorXd d(6);
  d << 1, 2, 3, 4, 5, 6;
  const ControlPlan p(3, {{-10, 10}, {-10, 10}}, d);
  VectorXd repeat(6), zero(6);
  repeat << 3, 4, 5, 6, 5, 6;
  zero << 3, 4, 5, 6, 0, 0;
  EXPECT_EQ(receding_shift(p, TailInit::RepeatLast).data(), repeat);
  EXPECT_EQ(receding_shift(p, TailInit::Zero).data(), zero);
  VectorXd c(2);
  c << 7, 8;
  EXPECT_EQ(receding_shift(p, TailInit::Constant, c).data().tail(2), c);
}

TEST(ControlPlan, HorizonOneIsFullyReinitialized) {
  const ControlPlan p(1, {{-1, 1}}, VectorXd::Constant(1, 0.4));
  EXPECT_EQ(receding_shift(p, TailInit::Zero).data()[0], 0.0);
}

TEST(ControlPlan, ClampAndLengthCheck) {
  ControlPlan p(2, {{-1, 1}});
  EXPECT_EQ(p.data(), VectorXd::Zero(2));
  VectorXd d(2);
  d << 3.0, -2.0;
  p.set_data(d);
  p.clamp_to_bounds();
  EXPECT_EQ(p.data()[0], 1.0);
  EXPECT_EQ(p.data()[1], -1.0);
  EXPECT_THROW(p.set_data(VectorXd::Zero(3)), std::invalid_argument);
}

TEST(CostParams, GammaAndValidation) {
  const CostParams c(2.0, 0.25);
  EXPECT_EQ(c.gamma(), 2.0 * (1.0 - 0.25));
  EXPECT_EQ(CostParams(3.0, 1.0).gamma(), 0.0);
  EXPECT_THROW(CostParams(0.0, 0.0), std::invalid_argument);
  EXPECT_THROW(CostParams(1.0, 1.5), std::invalid_argument);
}

TEST(Rng, DerivedSeedsAreDistinctAndStable) {
  EXPECT_EQ(derive_seed(1, {2, 3}), derive_seed(1, {2, 3}));
  EXPECT_NE(derive_seed(1, {2, 3}), derive_seed(1, {3, 2}));
  EXPECT_NE(derive_seed(1, {0}), derive_seed(2, {0}));
}
