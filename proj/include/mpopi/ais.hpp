#pragma once

#include "mpopi/gaussian.hpp"
#include "mpopi/plan.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace mpopi {

enum class CovEstimator { Sample, Shrinkage };

/// Parameters for every strategy. Each strategy reads only its own fields.
struct AisParams {
  double ais_lambda = 10.0;  // exploration temperature, separate from the controller's

  // cross-entropy
  double elite_fraction = 0.125;
  CovEstimator cov_estimator = CovEstimator::Sample;
  double smoothing_rate = 0.5;

  // CMA
  double cma_mean_rate = 1.0;
  double cma_cov_rate = 0.5;

  /// max(1, floor(elite_fraction * K))
  int elite_count(Eigen::Index samples) const;
};

struct AisContext {
  const JointProposal& proposal;  // (U', Sigma') that generated the batch
  const RolloutBatch& batch;
  int iteration;                  // 1-based
  const AisParams& params;
};

/// Weighted first and second moments of v_k = U' + eps_k.
struct Moments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

Moments weighted_moments(const RolloutBatch& batch, const Eigen::VectorXd& weights);

/// Ledoit-Wolf convex shrinkage of the sample covariance of `samples`
/// (one per column, MLE normalization) toward (trace/p) I.
Eigen::MatrixXd ledoit_wolf_covariance(const Eigen::MatrixXd& samples);

/// Sample indices sorted by ascending cost, ties by ascending index.
std::vector<Eigen::Index> rank_by_cost(const Eigen::VectorXd& costs);

/// log-rank recombination weights over the best floor(K/2) samples.
Eigen::VectorXd cma_recombination_weights(Eigen::Index samples);

/// `draws` indices sampled with replacement with probabilities `weights`.
std::vector<Eigen::Index> multinomial_resample(const Eigen::VectorXd& weights, Eigen::Index draws,
                                               std::uint64_t seed);

JointProposal mu_ais_update(const AisContext& ctx);
/// Pre-regularization moments used by mu_sigma_ais_update.
Moments mu_sigma_ais_moments(const AisContext& ctx);
JointProposal mu_sigma_ais_update(const AisContext& ctx);
JointProposal ce_update(const AisContext& ctx);
JointProposal cma_update(const AisContext& ctx);
JointProposal pmc_update(const AisContext& ctx, std::uint64_t seed);

/// Uniform interface the controller calls between iterations.
class AisStrategy {
 public:
  virtual ~AisStrategy() = default;
  virtual std::string_view name() const = 0;
  virtual JointProposal update(const AisContext& ctx, std::uint64_t seed) const = 0;
};

/// One of "pmc", "mu", "musigma", "ce", "cma". Throws std::invalid_argument
/// for anything else.
std::unique_ptr<AisStrategy> make_ais_strategy(std::string_view name);

}  // namespace mpopi
