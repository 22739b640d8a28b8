#pragma once

#include "mpopi/ais.hpp"
#include "mpopi/plan.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mpopi {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvKind { MountainCar, Car, MultiCar };
enum class Algo { Mppi, Mpopi };

std::string to_string(EnvKind env);
std::string to_string(Algo algo);

/// Everything needed to reproduce one batch of trials. Populated from a
/// preset, then a key=value file, then command-line overrides.
struct ExperimentConfig {
  std::string preset;
  EnvKind env = EnvKind::MountainCar;
  int cars = 2;  // multicar only
  Algo algo = Algo::Mpopi;
  std::string ais = "ce";

  int samples = 20;     // K
  int iterations = 1;   // L
  int horizon = 50;     // T
  double lambda = 1.0;
  double alpha = 0.0;
  double ais_lambda = 0.0;  // <= 0 means 10x lambda
  std::vector<double> noise_std{1.0};  // per channel, one step's diagonal of Sigma

  double elite_fraction = 0.125;
  CovEstimator cov_estimator = CovEstimator::Sample;
  double smoothing_rate = 0.5;
  double cma_mean_rate = 1.0;
  double cma_cov_rate = 0.5;
  TailInit tail_init = TailInit::RepeatLast;
  double input_smoothing = 0.0;

  int trials = 10;
  std::uint64_t seed = 1;
  std::string track;
  std::string output = "results";
  int threads = 1;

  int laps = 2;             // racing
  int max_steps = 200;      // episode cap
  double initial_speed = 8.0;  // m/s, racing

  int effective_samples() const { return samples * iterations; }
  double resolved_ais_lambda() const { return ais_lambda > 0.0 ? ais_lambda : 10.0 * lambda; }
  AisParams ais_params() const;
};

/// Names accepted by preset_config.
std::vector<std::string> preset_names();
ExperimentConfig preset_config(std::string_view name);

/// Sets one key. Keys match the long CLI flag names without dashes
/// (samples, iters, horizon, lambda, ...). Throws ConfigError.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Applies `key = value` lines (`#` comments). A `preset` line resets the
/// config to that preset before later lines apply.
void apply_config_text(ExperimentConfig& config, const std::string& text);
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

/// Throws ConfigError for inconsistent settings (e.g. mppi with L != 1).
void validate(const ExperimentConfig& config);

/// Serializes to key=value lines that apply_config_text reads back.
std::string to_config_text(const ExperimentConfig& config);

}  // namespace mpopi
