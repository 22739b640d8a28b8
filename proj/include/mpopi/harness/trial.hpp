#pragma once

#include "mpopi/harness/config.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mpopi {

/// One row of trials.csv.
struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::string env;
  std::string algo;
  std::string ais;
  int K = 0;
  int L = 0;
  int T = 0;
  int effective_samples = 0;
  double total_reward = 0.0;
  int steps = 0;
  int laps = 0;
  bool beta_violation = false;
  bool track_violation = false;
  double wall_time_s = 0.0;
  std::string fail_reason;  // empty when the task was completed

  bool completed() const { return fail_reason.empty(); }
  bool operator==(const TrialRecord&) const = default;
};

/// hash(master seed, level index, trial index).
std::uint64_t trial_seed(std::uint64_t master, int level, int trial);

/// Runs one episode. Controller or dynamics errors end the trial with
/// fail_reason set; they are not rethrown.
TrialRecord run_trial(const ExperimentConfig& config, int trial, std::uint64_t seed);

/// Runs config.trials episodes for sweep level `level`, spread over
/// config.threads OpenMP threads. The result does not depend on the thread
/// count apart from wall_time_s.
std::vector<TrialRecord> run_trials(const ExperimentConfig& config, int level = 0);

struct Level {
  int samples;
  int iterations;
};

struct LevelSummary {
  int level = 0;
  std::string algo;
  std::string ais;
  int K = 0;
  int L = 0;
  int effective_samples = 0;
  int trials = 0;
  double mean_reward = 0.0;
  double reward_ci = 0.0;  // 1.96 standard errors
  double mean_steps = 0.0;
  double steps_ci = 0.0;
  double completion_rate = 0.0;
  double beta_violation_rate = 0.0;
  double track_violation_rate = 0.0;
  double mean_wall_time_s = 0.0;
};

/// Mean and 1.96 * sd / sqrt(n) half width; half width is 0 for n < 2.
struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};
MeanCi mean_ci(std::span<const double> values);

LevelSummary summarize(std::span<const TrialRecord> records, int level = 0);

struct SweepResult {
  std::vector<TrialRecord> records;
  std::vector<LevelSummary> levels;
};

/// Runs the base config at each (K, L) level. Trial t of level i uses
/// trial_seed(config.seed, i, t).
SweepResult run_sweep(const ExperimentConfig& base, std::span<const Level> levels);

/// Parses "20x1,40x1,20x2" into levels.
std::vector<Level> parse_levels(const std::string& text);

/// Paired comparison of two configs on identical trial seeds.
struct PairedComparison {
  LevelSummary a;
  LevelSummary b;
  MeanCi reward_diff;  // b - a per trial
  MeanCi steps_diff;
  std::vector<TrialRecord> records;  // a's trials then b's
};
PairedComparison run_compare(const ExperimentConfig& a, const ExperimentConfig& b);

}  // namespace mpopi
