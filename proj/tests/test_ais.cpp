#include "mpopi/ais.hpp"
#include "mpopi/weights.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace mpopi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Fixture {
  JointProposal proposal;
  RolloutBatch batch;
  AisParams params;
  AisContext ctx() const { return {proposal, batch, 1, params}; }
};

Fixture random_fixture(int n, int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Fixture f;
  VectorXd mean(n);
  for (int i = 0; i < n; ++i) mean[i] = nd(rng);
  f.proposal = JointProposal::dense(mean, MatrixXd::Identity(n, n));
  f.batch.sampled_mean = mean;
  f.batch.noise = f.proposal.sample_noise(K, seed);
  f.batch.costs.resize(K);
  for (int k = 0; k < K; ++k) f.batch.costs[k] = 3.0 * nd(rng);
  return f;
}

// Weighted moments by explicit loops, with weights computed from scratch.
void oracle_moments(const Fixture& f, double lambda, VectorXd& mean, MatrixXd& cov) {
  const auto& b = f.batch;
  const double rho = b.costs.minCoeff();
  VectorXd w(b.costs.size());
  for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = std::exp(-(b.costs[k] - rho) / lambda);
  w /= w.sum();
  const Eigen::Index n = b.sampled_mean.size();
  mean = VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < w.size(); ++k) mean += w[k] * (b.sampled_mean + b.noise.col(k));
  cov = MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < w.size(); ++k) {
    const VectorXd d = b.sampled_mean + b.noise.col(k) - mean;
    cov += w[k] * d * d.transpose();
  }
}

}  // namespace

TEST(MuAis, EqualCostsGiveUniformMean) {
  Fixture f = random_fixture(3, 10, 1);
  f.batch.costs.setConstant(2.5);
  const JointProposal p = mu_ais_update(f.ctx());
  const VectorXd expect = f.batch.sampled_mean + f.batch.noise.rowwise().mean();
  EXPECT_LE((p.mean() - expect).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_EQ(p.cov(), f.proposal.cov());
}

TEST(MuAis, HugeTemperatureApproachesUniformMean) {
  Fixture f = random_fixture(4, 16, 2);
  f.params.ais_lambda = 1e9;
  const VectorXd expect = f.batch.sampled_mean + f.batch.noise.rowwise().mean();
  EXPECT_LE((mu_ais_update(f.ctx()).mean() - expect).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(MuSigmaAis, MomentsMatchOracle) {
  for (int trial = 0; trial < 20; ++trial) {
    Fixture f = random_fixture(1 + trial % 5, 8 + trial, 100 + trial);
    f.params.ais_lambda = 0.5 + trial;
    VectorXd mean;
    MatrixXd cov;
    oracle_moments(f, f.params.ais_lambda, mean, cov);
    const Moments m = mu_sigma_ais_moments(f.ctx());
    EXPECT_LE((m.mean - mean).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_LE((m.cov - cov).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(MuSigmaAis, NeedsTwoSamplesAndRegularizes) {
  Fixture one = random_fixture(2, 1, 3);
  EXPECT_THROW(mu_sigma_ais_moments(one.ctx()), std::invalid_argument);
  // Two samples in 3 dimensions: the moment covariance is rank one.
  Fixture two = random_fixture(3, 2, 4);
  const JointProposal p = mu_sigma_ais_update(two.ctx());
  EXPECT_FALSE(p.degenerate());
  EXPECT_TRUE(p.chol().allFinite());
}

TEST(CrossEntropy, EliteCountFloorAndMinimum) {
  AisParams p;
  EXPECT_EQ(p.elite_count(20), 2);
  EXPECT_EQ(p.elite_count(7), 1);
  EXPECT_EQ(p.elite_count(150), 18);
  p.elite_fraction = 1.0;
  EXPECT_EQ(p.elite_count(5), 5);
}

TEST(CrossEntropy, FullSmoothingKeepsProposal) {
  Fixture f = random_fixture(3, 16, 5);
  f.params.smoothing_rate = 1.0;
  const JointProposal p = ce_update(f.ctx());
  EXPECT_EQ(p.mean(), f.proposal.mean());
  EXPECT_EQ(p.cov(), f.proposal.cov());
}

TEST(CrossEntropy, NoSmoothingFitsElites) {
  Fixture f = random_fixture(2, 40, 6);
  f.params.smoothing_rate = 0.0;
  f.params.elite_fraction = 0.25;
  const auto order = rank_by_cost(f.batch.costs);
  VectorXd mean = VectorXd::Zero(2);
  for (int i = 0; i < 10; ++i) mean += f.batch.sample(order[i]) / 10.0;
  EXPECT_LE((ce_update(f.ctx()).mean() - mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossEntropy, PermutationChangesNothingWithoutTies) {
  Fixture f = random_fixture(3, 24, 7);
  const JointProposal a = ce_update(f.ctx());
  std::vector<int> perm(24);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(3));
  Fixture g = f;
  for (int k = 0; k < 24; ++k) {
    g.batch.noise.col(k) = f.batch.noise.col(perm[k]);
    g.batch.costs[k] = f.batch.costs[perm[k]];
  }
  const JointProposal b = ce_update(g.ctx());
  // Elite sums may be accumulated in a different order.
  EXPECT_LE((a.mean() - b.mean()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.cov() - b.cov()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(CrossEntropy, TiesBreakByIndex) {
  VectorXd c(5);
  c << 2.0, 1.0, 1.0, 0.5, 1.0;
  const auto order = rank_by_cost(c);
  EXPECT_EQ(order, (std::vector<Eigen::Index>{3, 1, 2, 4, 0}));
}

TEST(CrossEntropy, ShrinkageIsPositiveDefinite) {
  Fixture f = random_fixture(6, 16, 8);
  f.params.cov_estimator = CovEstimator::Shrinkage;
  const JointProposal p = ce_update(f.ctx());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.cov());
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
}

TEST(LedoitWolf, BetweenSampleAndTarget) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd;
  MatrixXd x(4, 6);
  for (int i = 0; i < x.size(); ++i) x.data()[i] = nd(rng);
  const MatrixXd lw = ledoit_wolf_covariance(x);
  const MatrixXd c = x.colwise() - x.rowwise().mean();
  const MatrixXd s = c * c.transpose() / 6.0;
  const double mu = s.trace() / 4.0;
  // lw = a * mu I + (1 - a) s for a single a in [0, 1]
  const double a = (lw(0, 1) - s(0, 1)) / (0.0 - s(0, 1));
  EXPECT_GE(a, 0.0);
  EXPECT_LE(a, 1.0);
  const MatrixXd rebuilt = a * mu * MatrixXd::Identity(4, 4) + (1.0 - a) * s;
  EXPECT_LE((lw - rebuilt).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Cma, RecombinationWeights) {
  const VectorXd w = cma_recombination_weights(20);
  EXPECT_EQ(w.size(), 10);
  EXPECT_NEAR(w.sum(), 1.0, 1e-15);
  for (Eigen::Index i = 1; i < w.size(); ++i) EXPECT_LT(w[i], w[i - 1]);
  // log-rank: w_i proportional to ln(mu + 1) - ln(i)
  const double r = (std::log(11.0) - std::log(1.0)) / (std::log(11.0) - std::log(2.0));
  EXPECT_NEAR(w[0] / w[1], r, 1e-12);
}

TEST(Cma, ZeroCovarianceRateMovesMeanOnly) {
  Fixture f = random_fixture(3, 10, 10);
  f.params.cma_cov_rate = 0.0;
  const JointProposal p = cma_update(f.ctx());
  EXPECT_EQ(p.cov(), f.proposal.cov());
  EXPECT_NE(p.mean(), f.proposal.mean());
}

TEST(Pmc, ResamplingFrequenciesPassChiSquare) {
  VectorXd w(5);
  w << 0.4, 0.3, 0.15, 0.1, 0.05;
  const int N = 200000;
  const auto picks = multinomial_resample(w, N, 17);
  std::vector<int> counts(5, 0);
  for (auto i : picks) ++counts[static_cast<std::size_t>(i)];
  double chi2 = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double e = N * w[i];
    chi2 += (counts[i] - e) * (counts[i] - e) / e;
  }
  // 4 degrees of freedom, 0.999 quantile
  EXPECT_LT(chi2, 18.47);
}

TEST(Pmc, KeepsCovarianceAndIsSeeded) {
  Fixture f = random_fixture(3, 12, 11);
  const JointProposal a = pmc_update(f.ctx(), 5);
  const JointProposal b = pmc_update(f.ctx(), 5);
  EXPECT_EQ(a.mean(), b.mean());
  EXPECT_EQ(a.cov(), f.proposal.cov());
}

TEST(Strategies, FactoryNames) {
  for (const char* n : {"mu", "musigma", "ce", "cma", "pmc"}) {
    EXPECT_EQ(make_ais_strategy(n)->name(), n);
  }
  EXPECT_THROW(make_ais_strategy("nope"), std::invalid_argument);
}

// Quadratic cost with minimizer v*: every strategy should move the mean
// strictly closer to v* in the Sigma^{-1} norm when K is large.
TEST(Strategies, MoveTowardQuadraticMinimizer) {
  const int n = 4, K = 10000;
  VectorXd target(n);
  target << 1.0, -0.5, 0.8, 0.2;
  Fixture f;
  f.proposal = JointProposal::dense(VectorXd::Zero(n), 0.5 * MatrixXd::Identity(n, n));
  f.batch.sampled_mean = VectorXd::Zero(n);
  f.batch.noise = f.proposal.sample_noise(K, 123);
  f.batch.costs.resize(K);
  for (int k = 0; k < K; ++k) f.batch.costs[k] = (f.batch.sample(k) - target).squaredNorm();
  f.params.ais_lambda = 1.0;
  const auto dist = [&](const VectorXd& m) {
    const VectorXd d = m - target;
    return d.dot(f.proposal.solve(d));
  };
  const double before = dist(f.proposal.mean());
  for (const char* name : {"mu", "musigma", "ce", "cma", "pmc"}) {
    const JointProposal p = make_ais_strategy(name)->update(f.ctx(), 1);
    EXPECT_LT(dist(p.mean()), before) << name;
  }
}
