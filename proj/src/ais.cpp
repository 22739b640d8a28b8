#include "mpopi/ais.hpp"

#include "mpopi/rng.hpp"
#include "mpopi/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace mpopi {

int AisParams::elite_count(Eigen::Index samples) const {
  const auto n = static_cast<int>(std::floor(elite_fraction * static_cast<double>(samples)));
  return std::max(1, n);
}

Moments weighted_moments(const RolloutBatch& batch, const Eigen::VectorXd& weights) {
  Eigen::VectorXd mean = batch.sampled_mean + batch.noise * weights;
  Eigen::MatrixXd centered = batch.noise.colwise() - (mean - batch.sampled_mean);
  Eigen::MatrixXd cov = centered * weights.asDiagonal() * centered.transpose();
  return {std::move(mean), std::move(cov)};
}

Eigen::MatrixXd ledoit_wolf_covariance(const Eigen::MatrixXd& samples) {
  const double n = static_cast<double>(samples.cols());
  const double p = static_cast<double>(samples.rows());
  Eigen::MatrixXd x = samples.colwise() - samples.rowwise().mean();
  Eigen::MatrixXd s = x * x.transpose() / n;
  const double mu = s.trace() / p;
  Eigen::MatrixXd target = mu * Eigen::MatrixXd::Identity(s.rows(), s.cols());
  const double d2 = (s - target).squaredNorm();
  if (d2 <= 0.0) return s;
  // ||x x^T - S||_F^2 = ||x||^4 - 2 x^T S x + ||S||_F^2
  const double s_norm2 = s.squaredNorm();
  double b2 = 0.0;
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    const double xx = x.col(k).squaredNorm();
    b2 += xx * xx - 2.0 * x.col(k).dot(s * x.col(k)) + s_norm2;
  }
  b2 = std::min(b2 / (n * n), d2);
  const double shrink = b2 / d2;
  return shrink * target + (1.0 - shrink) * s;
}

std::vector<Eigen::Index> rank_by_cost(const Eigen::VectorXd& costs) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(costs.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return costs[a] < costs[b]; });
  return order;
}

Eigen::VectorXd cma_recombination_weights(Eigen::Index samples) {
  const Eigen::Index mu = std::max<Eigen::Index>(1, samples / 2);
  Eigen::VectorXd w(mu);
  for (Eigen::Index i = 0; i < mu; ++i) {
    w[i] = std::log(static_cast<double>(mu) + 1.0) - std::log(static_cast<double>(i + 1));
  }
  return w / w.sum();
}

std::vector<Eigen::Index> multinomial_resample(const Eigen::VectorXd& weights, Eigen::Index draws,
                                               std::uint64_t seed) {
  SplitMix64 engine(seed);
  std::discrete_distribution<Eigen::Index> pick(weights.data(), weights.data() + weights.size());
  std::vector<Eigen::Index> out(static_cast<std::size_t>(draws));
  for (auto& i : out) i = pick(engine);
  return out;
}

namespace {

void require_samples(const AisContext& ctx, Eigen::Index min_k, const char* who) {
  if (ctx.batch.samples() < min_k) {
    throw std::invalid_argument(std::string(who) + ": needs at least " + std::to_string(min_k) +
                                " samples, got " + std::to_string(ctx.batch.samples()));
  }
  if (ctx.batch.costs.size() != ctx.batch.samples()) {
    throw std::invalid_argument(std::string(who) + ": cost/noise count mismatch");
  }
}

}  // namespace

JointProposal mu_ais_update(const AisContext& ctx) {
  require_samples(ctx, 1, "mu_ais_update");
  const Eigen::VectorXd w = softmax_weights(ctx.batch.costs, ctx.params.ais_lambda);
  return ctx.proposal.with_mean(ctx.batch.sampled_mean + ctx.batch.noise * w);
}

Moments mu_sigma_ais_moments(const AisContext& ctx) {
  require_samples(ctx, 2, "mu_sigma_ais_update");
  return weighted_moments(ctx.batch, softmax_weights(ctx.batch.costs, ctx.params.ais_lambda));
}

JointProposal mu_sigma_ais_update(const AisContext& ctx) {
  Moments m = mu_sigma_ais_moments(ctx);
  return JointProposal::regularized(std::move(m.mean), m.cov);
}

JointProposal ce_update(const AisContext& ctx) {
  require_samples(ctx, 1, "ce_update");
  const RolloutBatch& b = ctx.batch;
  const int n_elite = ctx.params.elite_count(b.samples());
  const auto order = rank_by_cost(b.costs);

  Eigen::MatrixXd elites(b.noise.rows(), n_elite);
  for (int i = 0; i < n_elite; ++i) elites.col(i) = b.sample(order[static_cast<std::size_t>(i)]);

  Eigen::VectorXd elite_mean = elites.rowwise().mean();
  Eigen::MatrixXd elite_cov;
  if (ctx.params.cov_estimator == CovEstimator::Shrinkage) {
    elite_cov = ledoit_wolf_covariance(elites);
  } else {
    Eigen::MatrixXd c = elites.colwise() - elite_mean;
    elite_cov = c * c.transpose() / static_cast<double>(n_elite);
  }

  const double r = ctx.params.smoothing_rate;
  if (r == 1.0) return ctx.proposal;
  Eigen::VectorXd mean = (1.0 - r) * elite_mean + r * ctx.proposal.mean();
  Eigen::MatrixXd cov = (1.0 - r) * elite_cov + r * ctx.proposal.cov();
  return JointProposal::regularized(std::move(mean), cov);
}

JointProposal cma_update(const AisContext& ctx) {
  require_samples(ctx, 2, "cma_update");
  const RolloutBatch& b = ctx.batch;
  const auto order = rank_by_cost(b.costs);
  const Eigen::VectorXd w = cma_recombination_weights(b.samples());

  // Steps relative to the current mean U' are exactly the noise columns.
  Eigen::VectorXd step = Eigen::VectorXd::Zero(b.noise.rows());
  Eigen::MatrixXd rank_mu = Eigen::MatrixXd::Zero(b.noise.rows(), b.noise.rows());
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const auto y = b.noise.col(order[static_cast<std::size_t>(i)]);
    step += w[i] * y;
    rank_mu.noalias() += w[i] * y * y.transpose();
  }
  Eigen::VectorXd mean = ctx.proposal.mean() + ctx.params.cma_mean_rate * step;
  const double c = ctx.params.cma_cov_rate;
  if (c == 0.0) return ctx.proposal.with_mean(std::move(mean));
  Eigen::MatrixXd cov = (1.0 - c) * ctx.proposal.cov() + c * rank_mu;
  return JointProposal::regularized(std::move(mean), cov);
}

JointProposal pmc_update(const AisContext& ctx, std::uint64_t seed) {
  require_samples(ctx, 1, "pmc_update");
  const RolloutBatch& b = ctx.batch;
  const Eigen::VectorXd w = softmax_weights(b.costs, ctx.params.ais_lambda);
  const auto picks = multinomial_resample(w, b.samples(), seed);
  Eigen::VectorXd noise_mean = Eigen::VectorXd::Zero(b.noise.rows());
  for (Eigen::Index i : picks) noise_mean += b.noise.col(i);
  noise_mean /= static_cast<double>(picks.size());
  return ctx.proposal.with_mean(b.sampled_mean + noise_mean);
}

namespace {

class MuAis final : public AisStrategy {
 public:
  std::string_view name() const override { return "mu"; }
  JointProposal update(const AisContext& ctx, std::uint64_t) const override {
    return mu_ais_update(ctx);
  }
};

class MuSigmaAis final : public AisStrategy {
 public:
  std::string_view name() const override { return "musigma"; }
  JointProposal update(const AisContext& ctx, std::uint64_t) const override {
    return mu_sigma_ais_update(ctx);
  }
};

class CrossEntropy final : public AisStrategy {
 public:
  std::string_view name() const override { return "ce"; }
  JointProposal update(const AisContext& ctx, std::uint64_t) const override {
    return ce_update(ctx);
  }
};

class Cma final : public AisStrategy {
 public:
  std::string_view name() const override { return "cma"; }
  JointProposal update(const AisContext& ctx, std::uint64_t) const override {
    return cma_update(ctx);
  }
};

class Pmc final : public AisStrategy {
 public:
  std::string_view name() const override { return "pmc"; }
  JointProposal update(const AisContext& ctx, std::uint64_t seed) const override {
    return pmc_update(ctx, seed);
  }
};

}  // namespace

std::unique_ptr<AisStrategy> make_ais_strategy(std::string_view name) {
  if (name == "mu") return std::make_unique<MuAis>();
  if (name == "musigma") return std::make_unique<MuSigmaAis>();
  if (name == "ce") return std::make_unique<CrossEntropy>();
  if (name == "cma") return std::make_unique<Cma>();
  if (name == "pmc") return std::make_unique<Pmc>();
  throw std::invalid_argument("unknown AIS strategy '" + std::string(name) +
                              "' (expected pmc, mu, musigma, ce, cma)");
}

}  // namespace mpopi
