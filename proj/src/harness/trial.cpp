#include "mpopi/harness/trial.hpp"

#include "mpopi/controller.hpp"
#include "mpopi/env/mountain_car.hpp"
#include "mpopi/env/multi_car.hpp"
#include "mpopi/env/race_car.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <memory>
#include <random>
#include <sstream>

namespace mpopi {

namespace {

ControllerConfig controller_config(const ExperimentConfig& c, int action_dim, int threads) {
  ControllerConfig cc;
  cc.samples = c.samples;
  cc.ais_iterations = c.iterations;
  cc.horizon = c.horizon;
  cc.cost = CostParams(c.lambda, c.alpha);
  cc.ais = c.ais_params();
  Eigen::VectorXd var(action_dim);
  for (int i = 0; i < action_dim; ++i) {
    const double s = c.noise_std[static_cast<std::size_t>(i % c.noise_std.size())];
    var[i] = s * s;
  }
  std::vector<Eigen::MatrixXd> blocks(static_cast<std::size_t>(c.horizon),
                                      Eigen::MatrixXd(var.asDiagonal()));
  cc.base = JointProposal::block_diagonal(
      Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.horizon) * action_dim), blocks);
  cc.tail_init = c.tail_init;
  cc.input_smoothing = c.input_smoothing;
  cc.threads = threads;
  return cc;
}

// Closed loop: plan with the configured algorithm, apply u_0 through the
// actuator shaping, step the plant. Returns true if the plant reported a
// terminal state before the step cap.
template <Environment Env>
bool drive(const Env& env, typename Env::State& state, const ExperimentConfig& c,
           int threads, std::uint64_t seed, TrialRecord& rec) {
  const auto bounds = env.action_bounds();
  const int dim = static_cast<int>(bounds.size());
  const ControllerConfig cc = controller_config(c, dim, threads);
  std::unique_ptr<AisStrategy> ais;
  if (c.algo == Algo::Mpopi && c.iterations > 1) ais = make_ais_strategy(c.ais);

  ControlPlan plan(c.horizon, bounds);
  InputShaper shaper(bounds, c.input_smoothing);
  std::vector<double> action(static_cast<std::size_t>(dim));
  for (int t = 0; t < c.max_steps; ++t) {
    const std::uint64_t step_seed =
        derive_seed(seed, {kStepStream, static_cast<std::uint64_t>(t)});
    StepResult r = c.algo == Algo::Mppi ? mppi_step(env, state, plan, cc, step_seed)
                                        : mpopi_step(env, state, plan, cc, ais.get(), step_seed);
    shaper.reset();
    shaper.apply(r.command, action);
    Transition<typename Env::State> tr = env.step(state, action);
    state = std::move(tr.state);
    rec.total_reward += tr.reward;
    rec.steps = t + 1;
    plan = std::move(r.updated_plan);
    if (tr.terminal) return true;
  }
  return false;
}

std::string race_failure(const RaceProgress& p, const RaceRules& rules, bool terminal) {
  if (p.beta_time > rules.beta_time_limit + 1e-9) return "beta_time_limit";
  if (p.offtrack_time > rules.offtrack_time_limit + 1e-9) return "offtrack_time_limit";
  if (!terminal) return "step_limit";
  return {};
}

void run_mountaincar(const ExperimentConfig& c, int threads, std::uint64_t seed,
                     TrialRecord& rec) {
  MountainCarParams params;
  params.max_steps = c.max_steps;
  const MountainCarEnv env(params);
  SplitMix64 rng(derive_seed(seed, {kInitStream}));
  MountainCarState state;
  state.x = std::uniform_real_distribution<double>(-0.6, -0.4)(rng);
  state.v = 0.0;
  const bool reached = drive(env, state, c, threads, seed, rec);
  rec.laps = reached ? 1 : 0;
  if (!reached) rec.fail_reason = "step_limit";
}

void run_car(const ExperimentConfig& c, const Track& track, int threads, std::uint64_t seed,
             TrialRecord& rec) {
  RaceRules rules;
  rules.target_laps = c.laps;
  const RaceCarEnv env(track, CarParams{}, rules);
  RaceCarState state = start_on_track(track, 0.0, c.initial_speed);
  const bool terminal = drive(env, state, c, threads, seed, rec);
  rec.laps = state.race.laps;
  rec.beta_violation = state.race.beta_violation;
  rec.track_violation = state.race.track_violation;
  rec.fail_reason = race_failure(state.race, rules, terminal);
}

void run_multicar(const ExperimentConfig& c, const Track& track, int threads,
                  std::uint64_t seed, TrialRecord& rec) {
  RaceRules rules;
  rules.target_laps = c.laps;
  const MultiCarRules multi;
  const MultiCarEnv env(track, c.cars, CarParams{}, rules, multi);
  MultiCarState state = start_multicar(track, c.cars, c.initial_speed, multi);
  const bool terminal = drive(env, state, c, threads, seed, rec);
  rec.laps = c.laps;
  for (const RaceCarState& car : state.active()) {
    rec.laps = std::min(rec.laps, car.race.laps);
    rec.beta_violation = rec.beta_violation || car.race.beta_violation;
    rec.track_violation = rec.track_violation || car.race.track_violation;
    if (rec.fail_reason.empty()) {
      const std::string why = race_failure(car.race, rules, true);
      if (!why.empty()) rec.fail_reason = why;
    }
  }
  if (rec.fail_reason.empty() && !terminal) rec.fail_reason = "step_limit";
}

TrialRecord run_trial_impl(const ExperimentConfig& c, const Track* track, int trial,
                           std::uint64_t seed, int threads) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = seed;
  rec.env = to_string(c.env);
  if (c.env == EnvKind::MultiCar) rec.env += "(" + std::to_string(c.cars) + ")";
  rec.algo = to_string(c.algo);
  rec.ais = c.algo == Algo::Mppi ? "none" : c.ais;
  rec.K = c.samples;
  rec.L = c.iterations;
  rec.T = c.horizon;
  rec.effective_samples = c.effective_samples();

  const auto start = std::chrono::steady_clock::now();
  try {
    switch (c.env) {
      case EnvKind::MountainCar: run_mountaincar(c, threads, seed, rec); break;
      case EnvKind::Car: run_car(c, *track, threads, seed, rec); break;
      case EnvKind::MultiCar: run_multicar(c, *track, threads, seed, rec); break;
    }
  } catch (const std::exception& e) {
    rec.fail_reason = std::string("error: ") + e.what();
  }
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

std::unique_ptr<Track> load_track(const ExperimentConfig& c) {
  if (c.env == EnvKind::MountainCar) return nullptr;
  try {
    return std::make_unique<Track>(make_track(c.track, true));
  } catch (const TrackError& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t master, int level, int trial) {
  return derive_seed(master, {static_cast<std::uint64_t>(level), static_cast<std::uint64_t>(trial)});
}

TrialRecord run_trial(const ExperimentConfig& config, int trial, std::uint64_t seed) {
  validate(config);
  const auto track = load_track(config);
  return run_trial_impl(config, track.get(), trial, seed, config.threads);
}

std::vector<TrialRecord> run_trials(const ExperimentConfig& config, int level) {
  validate(config);
  const auto track = load_track(config);
  std::vector<TrialRecord> out(static_cast<std::size_t>(config.trials));
  if (config.threads > 1 && config.trials > 1) {
#pragma omp parallel for schedule(dynamic) num_threads(config.threads)
    for (int t = 0; t < config.trials; ++t) {
      out[static_cast<std::size_t>(t)] =
          run_trial_impl(config, track.get(), t, trial_seed(config.seed, level, t), 1);
    }
  } else {
    for (int t = 0; t < config.trials; ++t) {
      out[static_cast<std::size_t>(t)] = run_trial_impl(config, track.get(), t,
                                                        trial_seed(config.seed, level, t),
                                                        config.threads);
    }
  }
  return out;
}

MeanCi mean_ci(std::span<const double> values) {
  MeanCi r;
  const std::size_t n = values.size();
  if (n == 0) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(n);
  if (n < 2) return r;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  r.half_width = 1.96 * sd / std::sqrt(static_cast<double>(n));
  return r;
}

LevelSummary summarize(std::span<const TrialRecord> records, int level) {
  LevelSummary s;
  s.level = level;
  s.trials = static_cast<int>(records.size());
  if (records.empty()) return s;
  const TrialRecord& first = records.front();
  s.algo = first.algo;
  s.ais = first.ais;
  s.K = first.K;
  s.L = first.L;
  s.effective_samples = first.effective_samples;

  std::vector<double> reward, steps;
  int completed = 0, beta = 0, track = 0;
  double wall = 0.0;
  for (const TrialRecord& r : records) {
    reward.push_back(r.total_reward);
    steps.push_back(r.steps);
    completed += r.completed();
    beta += r.beta_violation;
    track += r.track_violation;
    wall += r.wall_time_s;
  }
  const MeanCi rw = mean_ci(reward);
  const MeanCi st = mean_ci(steps);
  const double n = static_cast<double>(records.size());
  s.mean_reward = rw.mean;
  s.reward_ci = rw.half_width;
  s.mean_steps = st.mean;
  s.steps_ci = st.half_width;
  s.completion_rate = completed / n;
  s.beta_violation_rate = beta / n;
  s.track_violation_rate = track / n;
  s.mean_wall_time_s = wall / n;
  return s;
}

SweepResult run_sweep(const ExperimentConfig& base, std::span<const Level> levels) {
  SweepResult out;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    ExperimentConfig c = base;
    c.samples = levels[i].samples;
    c.iterations = levels[i].iterations;
    std::vector<TrialRecord> recs = run_trials(c, static_cast<int>(i));
    out.levels.push_back(summarize(recs, static_cast<int>(i)));
    out.records.insert(out.records.end(), recs.begin(), recs.end());
  }
  return out;
}

std::vector<Level> parse_levels(const std::string& text) {
  std::vector<Level> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto x = item.find('x');
    try {
      if (x == std::string::npos) throw std::invalid_argument("missing x");
      std::size_t used_k = 0, used_l = 0;
      const std::string ks = item.substr(0, x);
      const std::string ls = item.substr(x + 1);
      const int k = std::stoi(ks, &used_k);
      const int l = std::stoi(ls, &used_l);
      if (used_k != ks.size() || used_l != ls.size() || k < 1 || l < 1) {
        throw std::invalid_argument("range");
      }
      out.push_back({k, l});
    } catch (const std::exception&) {
      throw ConfigError("bad sweep level '" + item + "' (expected KxL, e.g. 20x3)");
    }
  }
  if (out.empty()) throw ConfigError("sweep needs at least one level");
  return out;
}

PairedComparison run_compare(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.trials != b.trials || a.seed != b.seed) {
    throw ConfigError("compare needs the same trial count and seed on both sides");
  }
  PairedComparison out;
  std::vector<TrialRecord> ra = run_trials(a, 0);
  std::vector<TrialRecord> rb = run_trials(b, 0);
  out.a = summarize(ra, 0);
  out.b = summarize(rb, 1);
  std::vector<double> dr, ds;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    dr.push_back(rb[i].total_reward - ra[i].total_reward);
    ds.push_back(rb[i].steps - ra[i].steps);
  }
  out.reward_diff = mean_ci(dr);
  out.steps_diff = mean_ci(ds);
  out.records = std::move(ra);
  out.records.insert(out.records.end(), rb.begin(), rb.end());
  return out;
}

}  // namespace mpopi
