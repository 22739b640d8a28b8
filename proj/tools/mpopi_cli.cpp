// mpopi: run, sweep and compare sampling MPC controllers over repeated trials.
//
//   mpopi run     --preset mountaincar-paper --algo mpopi --ais ce --samples 20 --iters 2
//   mpopi sweep   --preset mountaincar-paper --levels 20x1,20x2,20x4,20x8
//   mpopi compare --preset car-short --algo mpopi --b algo=mppi --b iters=1 --b samples=450

#include "mpopi/harness/config.hpp"
#include "mpopi/harness/results.hpp"
#include "mpopi/harness/trial.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace {

using mpopi::ExperimentConfig;

// Flags shared by every subcommand, kept as strings and applied through the
// same path as config-file keys so a flag and a key behave identically.
struct CommonFlags {
  std::string preset;
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> values;  // (key, value) in flag order
  std::map<std::string, std::string> storage;

  void add(CLI::App& app) {
    app.add_option("--preset", preset, "Start from a named preset");
    app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
    const std::vector<std::pair<std::string, std::string>> flags{
        {"env", "mountaincar | car | multicar(N)"},
        {"algo", "mppi | mpopi"},
        {"ais", "mu | musigma | ce | cma | pmc"},
        {"samples", "Samples per iteration (K)"},
        {"iters", "Sampling iterations per control step (L)"},
        {"horizon", "Planning horizon in control steps (T)"},
        {"lambda", "Controller inverse temperature"},
        {"alpha", "Control cost decoupling in [0, 1]"},
        {"ais-lambda", "AIS inverse temperature (default 10 x lambda)"},
        {"trials", "Number of trials"},
        {"seed", "Master seed"},
        {"track", "Track file (x_m, y_m, half_width_m per line)"},
        {"out", "Output directory"},
        {"threads", "Worker threads"},
        {"noise-std", "Per-channel noise standard deviation, comma separated"},
        {"laps", "Laps to complete (racing)"},
        {"max-steps", "Episode step cap"},
        {"elite-fraction", "CE elite fraction"},
        {"smoothing-rate", "CE smoothing rate"},
        {"cov-estimator", "sample | shrinkage"},
        {"cars", "Number of cars (multicar)"},
    };
    for (const auto& [name, help] : flags) {
      storage[name];
      app.add_option("--" + name, storage[name], help);
    }
  }

  ExperimentConfig resolve(const CLI::App& app) const {
    ExperimentConfig c;
    if (!preset.empty()) c = mpopi::preset_config(preset);
    if (!config_path.empty()) c = mpopi::load_config_file(config_path, c);
    for (const auto& [name, value] : storage) {
      if (app.count("--" + name) > 0) mpopi::apply_setting(c, name, value);
    }
    // Preset-free runs of racing envs fall back to the bundled short loop.
    if (c.env != mpopi::EnvKind::MountainCar && c.track.empty()) c.track = "tracks/oval200.csv";
    if (c.env != mpopi::EnvKind::MountainCar && c.noise_std.size() == 1) c.noise_std = {0.1, 0.4};
    return c;
  }
};

void print_summary(const mpopi::LevelSummary& s) {
  std::printf("  %-5s %-8s K=%-4d L=%-2d eff=%-5d reward %.6g +/- %.3g  steps %.1f +/- %.2g  "
              "completion %.2f\n",
              s.algo.c_str(), s.ais.c_str(), s.K, s.L, s.effective_samples, s.mean_reward,
              s.reward_ci, s.mean_steps, s.steps_ci, s.completion_rate);
}

void write_config_copy(const ExperimentConfig& c, const std::string& name) {
  std::ofstream f(std::filesystem::path(c.output) / name);
  f << mpopi::to_config_text(c);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling-based MPC experiments"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags, cmp_flags;
  auto* run = app.add_subcommand("run", "Run trials for one configuration");
  run_flags.add(*run);

  auto* sweep = app.add_subcommand("sweep", "Run trials over several (K, L) levels");
  sweep_flags.add(*sweep);
  std::string levels_text;
  sweep->add_option("--levels", levels_text, "Comma separated KxL levels, e.g. 20x1,40x1,20x2")
      ->required();

  auto* compare = app.add_subcommand("compare", "Paired comparison of two configurations");
  cmp_flags.add(*compare);
  std::vector<std::string> b_settings;
  std::string b_config;
  compare->add_option("--b", b_settings, "key=value override defining config B (repeatable)");
  compare->add_option("--b-config", b_config, "Config file applied on top of A to form B")
      ->check(CLI::ExistingFile);

  bool list_presets = false;
  app.add_flag("--list-presets", list_presets, "Print preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    if (list_presets) {
      for (const auto& n : mpopi::preset_names()) std::cout << n << "\n";
      return 0;
    }
    return app.exit(e);
  }

  try {
    if (run->parsed()) {
      const ExperimentConfig c = run_flags.resolve(*run);
      mpopi::validate(c);
      const auto records = mpopi::run_trials(c, 0);
      const std::vector<mpopi::LevelSummary> levels{mpopi::summarize(records, 0)};
      mpopi::emit_results(c.output, records, levels);
      write_config_copy(c, "config.txt");
      std::printf("%d trials -> %s\n", c.trials, c.output.c_str());
      print_summary(levels.front());
    } else if (sweep->parsed()) {
      const ExperimentConfig c = sweep_flags.resolve(*sweep);
      const auto levels = mpopi::parse_levels(levels_text);
      for (const auto& l : levels) {
        ExperimentConfig probe = c;
        probe.samples = l.samples;
        probe.iterations = l.iterations;
        mpopi::validate(probe);
      }
      const auto result = mpopi::run_sweep(c, levels);
      mpopi::emit_results(c.output, result.records, result.levels);
      write_config_copy(c, "config.txt");
      std::printf("%zu levels x %d trials -> %s\n", levels.size(), c.trials, c.output.c_str());
      for (const auto& s : result.levels) print_summary(s);
    } else if (compare->parsed()) {
      const ExperimentConfig a = cmp_flags.resolve(*compare);
      ExperimentConfig b = a;
      if (!b_config.empty()) b = mpopi::load_config_file(b_config, b);
      for (const std::string& kv : b_settings) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw mpopi::ConfigError("--b expects key=value, got '" + kv + "'");
        mpopi::apply_setting(b, kv.substr(0, eq), kv.substr(eq + 1));
      }
      mpopi::validate(a);
      mpopi::validate(b);
      const auto cmp = mpopi::run_compare(a, b);
      const std::vector<mpopi::LevelSummary> levels{cmp.a, cmp.b};
      mpopi::emit_results(a.output, cmp.records, levels);
      write_config_copy(a, "config_a.txt");
      write_config_copy(b, "config_b.txt");
      {
        std::ofstream f(std::filesystem::path(a.output) / "paired.csv");
        f.precision(17);
        f << "metric,mean_diff_b_minus_a,ci_half_width\n"
          << "total_reward," << cmp.reward_diff.mean << ',' << cmp.reward_diff.half_width << "\n"
          << "steps," << cmp.steps_diff.mean << ',' << cmp.steps_diff.half_width << "\n";
      }
      std::printf("A vs B on %d paired trials -> %s\n", a.trials, a.output.c_str());
      print_summary(cmp.a);
      print_summary(cmp.b);
      std::printf("  B - A: reward %.6g +/- %.3g, steps %.2f +/- %.2g\n", cmp.reward_diff.mean,
                  cmp.reward_diff.half_width, cmp.steps_diff.mean, cmp.steps_diff.half_width);
    }
  } catch (const mpopi::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
