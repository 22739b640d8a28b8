#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace mpopi {

class CovarianceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Block-diagonal matrix with blocks[t] as the t-th diagonal block.
/// Every block must be square, of equal size, symmetric and positive definite.
Eigen::MatrixXd assemble_block_covariance(std::span<const Eigen::MatrixXd> blocks);

/// Lower Cholesky factor, or nullopt when the matrix is not numerically PD.
/// A pivot whose square falls below 1e-12 of the largest diagonal entry
/// counts as a failure.
std::optional<Eigen::MatrixXd> try_cholesky(const Eigen::MatrixXd& cov);

/// Outcome of the positive-definiteness repair applied after AIS updates.
struct Regularized {
  Eigen::MatrixXd cov;
  Eigen::MatrixXd chol;
  double jitter = 0.0;  // delta actually added to the diagonal
};

/// Symmetrizes `cov` and, when Cholesky fails, adds delta*I with
/// delta = 1e-8 * trace/n (1e-8 when the trace is zero), doubling delta up to
/// three times. Throws CovarianceError if the matrix still is not PD.
Regularized regularize_pd(const Eigen::MatrixXd& cov);

/// K columns of chol * z, z ~ N(0, I). Column k draws from the substream
/// derive_seed(seed, {k}), so each column is independent of scheduling.
Eigen::MatrixXd sample_noise(const Eigen::MatrixXd& chol, int samples, std::uint64_t seed);

/// Standard-normal vector of length n from the substream for column k.
Eigen::VectorXd standard_normal_column(Eigen::Index n, std::uint64_t seed, std::uint64_t k);

/// Joint Gaussian N(U, Sigma) over a whole control sequence. The Cholesky
/// factor is cached. When built from per-step blocks the block structure is
/// remembered and sampling/solves run per block.
class JointProposal {
 public:
  /// Empty (dimension 0) proposal; assign a real one before use.
  JointProposal() = default;

  /// Dense covariance. Throws CovarianceError unless cov is symmetric
  /// (1e-10) and PD. An all-zero matrix is accepted as the degenerate
  /// no-exploration proposal.
  static JointProposal dense(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  /// Covariance assembled from T per-step m x m blocks.
  static JointProposal block_diagonal(Eigen::VectorXd mean,
                                      std::span<const Eigen::MatrixXd> blocks);

  /// Dense covariance passed through regularize_pd first.
  static JointProposal regularized(Eigen::VectorXd mean, const Eigen::MatrixXd& cov);

  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  const Eigen::MatrixXd& chol() const { return chol_; }
  Eigen::Index dim() const { return mean_.size(); }
  /// Block size m when block-diagonal, 0 for a dense covariance.
  int block_size() const { return block_; }
  bool degenerate() const { return degenerate_; }

  /// Same covariance (and factor), different mean.
  JointProposal with_mean(Eigen::VectorXd mean) const;

  /// log q(v | U, Sigma).
  double log_density(const Eigen::VectorXd& v) const;

  /// Sigma^{-1} b via the cached factor.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  /// Zero-mean noise columns from N(0, Sigma).
  Eigen::MatrixXd sample_noise(int samples, std::uint64_t seed) const;

  /// Same as sample_noise but columns are generated across OpenMP threads.
  /// Output is bit-identical to the serial version.
  Eigen::MatrixXd sample_noise_parallel(int samples, std::uint64_t seed, int threads) const;

 private:
  Eigen::VectorXd noise_column(Eigen::Index k, std::uint64_t seed) const;

  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
  int block_ = 0;
  bool degenerate_ = false;
  double log_det_ = 0.0;
};

}  // namespace mpopi
