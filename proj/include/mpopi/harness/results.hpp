#pragma once

#include "mpopi/harness/trial.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mpopi {

/// Column names of trials.csv, in order.
const std::vector<std::string>& trial_columns();

/// Doubles are written with 17 significant digits so they read back exactly.
void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_trials_csv(std::istream& in);

void write_summary_csv(std::ostream& out, std::span<const LevelSummary> levels);
/// `level mean ci_low ci_high` of total reward, whitespace separated.
void write_summary_gnuplot(std::ostream& out, std::span<const LevelSummary> levels);

/// Writes trials.csv, summary.csv and summary.gnuplot.dat under `dir`,
/// creating it if needed. Throws std::runtime_error on I/O failure.
void emit_results(const std::string& dir, std::span<const TrialRecord> records,
                  std::span<const LevelSummary> levels);

}  // namespace mpopi
