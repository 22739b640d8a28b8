#include "mpopi/gaussian.hpp"

#include "mpopi/rng.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace mpopi {

namespace {

constexpr double kSymmetryTol = 1e-10;
constexpr double kPivotRelTol = 1e-12;

bool is_symmetric(const Eigen::MatrixXd& a, double tol) {
  return a.rows() == a.cols() && (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace

Eigen::MatrixXd assemble_block_covariance(std::span<const Eigen::MatrixXd> blocks) {
  if (blocks.empty()) throw CovarianceError("assemble_block_covariance: no blocks");
  const Eigen::Index m = blocks.front().rows();
  const Eigen::Index T = static_cast<Eigen::Index>(blocks.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m * T, m * T);
  for (Eigen::Index t = 0; t < T; ++t) {
    const Eigen::MatrixXd& b = blocks[static_cast<std::size_t>(t)];
    if (b.rows() != m || b.cols() != m) {
      throw CovarianceError("assemble_block_covariance: block " + std::to_string(t) +
                            " is not " + std::to_string(m) + "x" + std::to_string(m));
    }
    if (!is_symmetric(b, kSymmetryTol) || !try_cholesky(b)) {
      throw CovarianceError("assemble_block_covariance: block " + std::to_string(t) +
                            " is not symmetric positive definite");
    }
    out.block(t * m, t * m, m, m) = b;
  }
  return out;
}

std::optional<Eigen::MatrixXd> try_cholesky(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) return std::nullopt;
  if (!cov.allFinite()) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  Eigen::MatrixXd l = llt.matrixL();
  const double max_diag = cov.diagonal().cwiseAbs().maxCoeff();
  const double min_pivot_sq = l.diagonal().array().square().minCoeff();
  if (!(min_pivot_sq > kPivotRelTol * max_diag)) return std::nullopt;
  return l;
}

Regularized regularize_pd(const Eigen::MatrixXd& cov) {
  if (cov.rows() != cov.cols()) throw CovarianceError("regularize_pd: matrix not square");
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  if (auto l = try_cholesky(sym)) return {sym, *l, 0.0};

  const double n = static_cast<double>(sym.rows());
  const double trace = sym.trace();
  double delta = trace > 0.0 ? 1e-8 * trace / n : 1e-8;
  for (int attempt = 0; attempt < 4; ++attempt, delta *= 2.0) {
    Eigen::MatrixXd jittered = sym;
    jittered.diagonal().array() += delta;
    if (auto l = try_cholesky(jittered)) return {jittered, *l, delta};
  }
  throw CovarianceError("regularize_pd: covariance not positive definite after jitter " +
                        std::to_string(delta / 2.0));
}

Eigen::VectorXd standard_normal_column(Eigen::Index n, std::uint64_t seed, std::uint64_t k) {
  SplitMix64 engine(derive_seed(seed, {k}));
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = normal(engine);
  return z;
}

Eigen::MatrixXd sample_noise(const Eigen::MatrixXd& chol, int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("sample_noise: K must be >= 1");
  const Eigen::Index n = chol.rows();
  Eigen::MatrixXd out(n, samples);
  for (int k = 0; k < samples; ++k) {
    out.col(k) = chol.triangularView<Eigen::Lower>() *
                 standard_normal_column(n, seed, static_cast<std::uint64_t>(k));
  }
  return out;
}

JointProposal JointProposal::dense(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw CovarianceError("JointProposal: covariance is " + std::to_string(cov.rows()) + "x" +
                          std::to_string(cov.cols()) + ", mean has length " +
                          std::to_string(mean.size()));
  }
  if (!is_symmetric(cov, kSymmetryTol)) throw CovarianceError("JointProposal: covariance not symmetric");
  JointProposal p;
  p.mean_ = std::move(mean);
  if (cov.isZero(0.0)) {
    p.chol_ = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
    p.degenerate_ = true;
  } else {
    auto l = try_cholesky(cov);
    if (!l) throw CovarianceError("JointProposal: covariance not positive definite");
    p.chol_ = std::move(*l);
    p.log_det_ = 2.0 * p.chol_.diagonal().array().log().sum();
  }
  p.cov_ = std::move(cov);
  return p;
}

JointProposal JointProposal::block_diagonal(Eigen::VectorXd mean,
                                            std::span<const Eigen::MatrixXd> blocks) {
  Eigen::MatrixXd cov = assemble_block_covariance(blocks);
  if (cov.rows() != mean.size()) {
    throw CovarianceError("JointProposal: block covariance size does not match mean length");
  }
  JointProposal p;
  const Eigen::Index m = blocks.front().rows();
  p.mean_ = std::move(mean);
  p.chol_ = Eigen::MatrixXd::Zero(cov.rows(), cov.cols());
  for (std::size_t t = 0; t < blocks.size(); ++t) {
    const Eigen::Index o = static_cast<Eigen::Index>(t) * m;
    p.chol_.block(o, o, m, m) = *try_cholesky(blocks[t]);
  }
  p.log_det_ = 2.0 * p.chol_.diagonal().array().log().sum();
  p.cov_ = std::move(cov);
  p.block_ = static_cast<int>(m);
  return p;
}

JointProposal JointProposal::regularized(Eigen::VectorXd mean, const Eigen::MatrixXd& cov) {
  if (cov.rows() != mean.size()) {
    throw CovarianceError("JointProposal: covariance size does not match mean length");
  }
  Regularized r = regularize_pd(cov);
  JointProposal p;
  p.mean_ = std::move(mean);
  p.log_det_ = 2.0 * r.chol.diagonal().array().log().sum();
  p.cov_ = std::move(r.cov);
  p.chol_ = std::move(r.chol);
  return p;
}

JointProposal JointProposal::with_mean(Eigen::VectorXd mean) const {
  if (mean.size() != mean_.size()) throw CovarianceError("with_mean: dimension mismatch");
  JointProposal p = *this;
  p.mean_ = std::move(mean);
  return p;
}

double JointProposal::log_density(const Eigen::VectorXd& v) const {
  if (v.size() != mean_.size()) {
    throw std::invalid_argument("log_density: v has length " + std::to_string(v.size()) +
                                ", expected " + std::to_string(mean_.size()));
  }
  if (degenerate_) throw CovarianceError("log_density: degenerate covariance");
  Eigen::VectorXd r = chol_.triangularView<Eigen::Lower>().solve(v - mean_);
  const double n = static_cast<double>(mean_.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + log_det_ + r.squaredNorm());
}

Eigen::VectorXd JointProposal::solve(const Eigen::VectorXd& b) const {
  if (b.size() != mean_.size()) throw std::invalid_argument("solve: dimension mismatch");
  if (degenerate_) throw CovarianceError("solve: degenerate covariance has no inverse");
  if (block_ > 0) {
    Eigen::VectorXd x(b.size());
    for (Eigen::Index o = 0; o < b.size(); o += block_) {
      auto l = chol_.block(o, o, block_, block_);
      Eigen::VectorXd y = l.triangularView<Eigen::Lower>().solve(b.segment(o, block_));
      x.segment(o, block_) = l.transpose().triangularView<Eigen::Upper>().solve(y);
    }
    return x;
  }
  Eigen::VectorXd y = chol_.triangularView<Eigen::Lower>().solve(b);
  return chol_.transpose().triangularView<Eigen::Upper>().solve(y);
}

Eigen::VectorXd JointProposal::noise_column(Eigen::Index k, std::uint64_t seed) const {
  const Eigen::Index n = mean_.size();
  Eigen::VectorXd z = standard_normal_column(n, seed, static_cast<std::uint64_t>(k));
  if (degenerate_) return Eigen::VectorXd::Zero(n);
  if (block_ > 0) {
    Eigen::VectorXd out(n);
    for (Eigen::Index o = 0; o < n; o += block_) {
      out.segment(o, block_) =
          chol_.block(o, o, block_, block_).triangularView<Eigen::Lower>() * z.segment(o, block_);
    }
    return out;
  }
  return chol_.triangularView<Eigen::Lower>() * z;
}

Eigen::MatrixXd JointProposal::sample_noise(int samples, std::uint64_t seed) const {
  if (samples < 1) throw std::invalid_argument("sample_noise: K must be >= 1");
  Eigen::MatrixXd out(mean_.size(), samples);
  for (int k = 0; k < samples; ++k) out.col(k) = noise_column(k, seed);
  return out;
}

Eigen::MatrixXd JointProposal::sample_noise_parallel(int samples, std::uint64_t seed,
                                                     int threads) const {
  if (samples < 1) throw std::invalid_argument("sample_noise: K must be >= 1");
  Eigen::MatrixXd out(mean_.size(), samples);
#pragma omp parallel for num_threads(threads) schedule(static)
  for (int k = 0; k < samples; ++k) out.col(k) = noise_column(k, seed);
  return out;
}

}  // namespace mpopi
