#include "mpopi/harness/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace mpopi {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T value{};
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc() || ptr != end || s.empty()) {
    throw ConfigError("bad value '" + s + "' for " + std::string(key));
  }
  return value;
}

int parse_positive(std::string_view key, std::string_view text) {
  const int v = parse_number<int>(key, text);
  if (v < 1) throw ConfigError(std::string(key) + " must be >= 1");
  return v;
}

std::vector<double> parse_list(std::string_view key, std::string_view text) {
  std::vector<double> out;
  std::stringstream ss{std::string(text)};
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(parse_number<double>(key, cell));
  if (out.empty()) throw ConfigError("empty list for " + std::string(key));
  return out;
}

}  // namespace

std::string to_string(EnvKind env) {
  switch (env) {
    case EnvKind::MountainCar: return "mountaincar";
    case EnvKind::Car: return "car";
    case EnvKind::MultiCar: return "multicar";
  }
  return "?";
}

std::string to_string(Algo algo) { return algo == Algo::Mppi ? "mppi" : "mpopi"; }

AisParams ExperimentConfig::ais_params() const {
  AisParams p;
  p.ais_lambda = resolved_ais_lambda();
  p.elite_fraction = elite_fraction;
  p.cov_estimator = cov_estimator;
  p.smoothing_rate = smoothing_rate;
  p.cma_mean_rate = cma_mean_rate;
  p.cma_cov_rate = cma_cov_rate;
  return p;
}

std::vector<std::string> preset_names() {
  return {"mountaincar-paper", "car-short", "car-paper-scale", "multicar-short"};
}

ExperimentConfig preset_config(std::string_view name) {
  ExperimentConfig c;
  c.preset = std::string(name);
  if (name == "mountaincar-paper") {
    c.env = EnvKind::MountainCar;
    c.horizon = 50;
    c.lambda = 0.001;
    c.alpha = 0.0;
    c.noise_std = {0.5};
    c.max_steps = 200;
    c.trials = 1000;
    return c;
  }
  if (name == "car-short" || name == "car-paper-scale" || name == "multicar-short") {
    c.env = name == "multicar-short" ? EnvKind::MultiCar : EnvKind::Car;
    c.horizon = 20;
    c.lambda = 10.0;
    c.alpha = 0.0;
    c.noise_std = {0.1, 0.4};
    c.samples = 150;
    c.iterations = 3;
    c.trials = 25;
    c.initial_speed = 8.0;
    if (name == "car-paper-scale") {
      c.track = "tracks/course1180.csv";
      c.laps = 2;
      c.max_steps = 1500;
    } else {
      c.track = "tracks/oval200.csv";
      c.laps = 1;
      c.max_steps = 400;
    }
    if (name == "multicar-short") {
      // joint costs carry the pairwise terms; λ = 10 left both cars stalled in the first turn
      c.lambda = 1.0;
      c.samples = 250;
    }
    return c;
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'");
}

void apply_setting(ExperimentConfig& c, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "preset") {
    c = preset_config(value);
  } else if (key == "env") {
    if (value == "mountaincar") c.env = EnvKind::MountainCar;
    else if (value == "car") c.env = EnvKind::Car;
    else if (value.starts_with("multicar")) {
      c.env = EnvKind::MultiCar;
      // multicar(N) or multicar:N selects the car count inline.
      const auto open = value.find_first_of("(:");
      if (open != std::string::npos) {
        std::string n = value.substr(open + 1);
        if (!n.empty() && n.back() == ')') n.pop_back();
        c.cars = parse_number<int>("env", n);
      }
    } else {
      throw ConfigError("unknown env '" + value + "' (mountaincar, car, multicar(N))");
    }
  } else if (key == "cars") {
    c.cars = parse_number<int>(key, value);
  } else if (key == "algo") {
    if (value == "mppi") c.algo = Algo::Mppi;
    else if (value == "mpopi") c.algo = Algo::Mpopi;
    else throw ConfigError("unknown algo '" + value + "' (mppi, mpopi)");
  } else if (key == "ais") {
    try {
      make_ais_strategy(value);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    c.ais = value;
  } else if (key == "samples") {
    c.samples = parse_positive(key, value);
  } else if (key == "iters") {
    c.iterations = parse_positive(key, value);
  } else if (key == "horizon") {
    c.horizon = parse_positive(key, value);
  } else if (key == "lambda") {
    c.lambda = parse_number<double>(key, value);
  } else if (key == "alpha") {
    c.alpha = parse_number<double>(key, value);
  } else if (key == "ais-lambda" || key == "ais_lambda") {
    c.ais_lambda = parse_number<double>(key, value);
  } else if (key == "noise-std" || key == "noise_std") {
    c.noise_std = parse_list(key, value);
  } else if (key == "elite-fraction" || key == "elite_fraction") {
    c.elite_fraction = parse_number<double>(key, value);
  } else if (key == "cov-estimator" || key == "cov_estimator") {
    if (value == "sample") c.cov_estimator = CovEstimator::Sample;
    else if (value == "shrinkage") c.cov_estimator = CovEstimator::Shrinkage;
    else throw ConfigError("unknown cov estimator '" + value + "' (sample, shrinkage)");
  } else if (key == "smoothing-rate" || key == "smoothing_rate") {
    c.smoothing_rate = parse_number<double>(key, value);
  } else if (key == "cma-mean-rate" || key == "cma_mean_rate") {
    c.cma_mean_rate = parse_number<double>(key, value);
  } else if (key == "cma-cov-rate" || key == "cma_cov_rate") {
    c.cma_cov_rate = parse_number<double>(key, value);
  } else if (key == "tail-init" || key == "tail_init") {
    if (value == "repeat") c.tail_init = TailInit::RepeatLast;
    else if (value == "zero") c.tail_init = TailInit::Zero;
    else throw ConfigError("unknown tail-init '" + value + "' (repeat, zero)");
  } else if (key == "input-smoothing" || key == "input_smoothing") {
    c.input_smoothing = parse_number<double>(key, value);
  } else if (key == "trials") {
    c.trials = parse_positive(key, value);
  } else if (key == "seed") {
    c.seed = parse_number<std::uint64_t>(key, value);
  } else if (key == "track") {
    c.track = value;
  } else if (key == "out") {
    c.output = value;
  } else if (key == "threads") {
    c.threads = parse_positive(key, value);
  } else if (key == "laps") {
    c.laps = parse_positive(key, value);
  } else if (key == "max-steps" || key == "max_steps") {
    c.max_steps = parse_positive(key, value);
  } else if (key == "initial-speed" || key == "initial_speed") {
    c.initial_speed = parse_number<double>(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void apply_config_text(ExperimentConfig& config, const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    try {
      apply_setting(config, line.substr(0, eq), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    apply_config_text(base, buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return base;
}

void validate(const ExperimentConfig& c) {
  if (c.algo == Algo::Mppi && c.iterations != 1) {
    throw ConfigError("mppi runs a single sampling round; set iters = 1");
  }
  if (!(c.lambda > 0.0)) throw ConfigError("lambda must be > 0");
  if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw ConfigError("alpha must lie in [0, 1]");
  if (!(c.elite_fraction > 0.0 && c.elite_fraction <= 1.0)) {
    throw ConfigError("elite_fraction must lie in (0, 1]");
  }
  if (!(c.smoothing_rate >= 0.0 && c.smoothing_rate <= 1.0)) {
    throw ConfigError("smoothing_rate must lie in [0, 1]");
  }
  if (!(c.input_smoothing >= 0.0 && c.input_smoothing < 1.0)) {
    throw ConfigError("input_smoothing must lie in [0, 1)");
  }
  const std::size_t channels = c.env == EnvKind::MountainCar ? 1u : 2u;
  if (c.noise_std.size() != channels) {
    throw ConfigError("noise_std needs " + std::to_string(channels) + " entries for " +
                      to_string(c.env));
  }
  for (double s : c.noise_std) {
    if (!(s > 0.0)) throw ConfigError("noise_std entries must be > 0");
  }
  if (c.env == EnvKind::MultiCar && (c.cars < 2 || c.cars > 8)) {
    throw ConfigError("multicar needs between 2 and 8 cars");
  }
  if (c.env != EnvKind::MountainCar && c.track.empty()) {
    throw ConfigError("racing environments need a track file");
  }
}

std::string to_config_text(const ExperimentConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "env = " << to_string(c.env) << "\n";
  if (c.env == EnvKind::MultiCar) o << "cars = " << c.cars << "\n";
  o << "algo = " << to_string(c.algo) << "\n"
    << "ais = " << c.ais << "\n"
    << "samples = " << c.samples << "\n"
    << "iters = " << c.iterations << "\n"
    << "horizon = " << c.horizon << "\n"
    << "lambda = " << c.lambda << "\n"
    << "alpha = " << c.alpha << "\n"
    << "ais_lambda = " << c.ais_lambda << "\n"
    << "noise_std = ";
  for (std::size_t i = 0; i < c.noise_std.size(); ++i) o << (i ? "," : "") << c.noise_std[i];
  o << "\n"
    << "elite_fraction = " << c.elite_fraction << "\n"
    << "cov_estimator = " << (c.cov_estimator == CovEstimator::Sample ? "sample" : "shrinkage")
    << "\n"
    << "smoothing_rate = " << c.smoothing_rate << "\n"
    << "cma_mean_rate = " << c.cma_mean_rate << "\n"
    << "cma_cov_rate = " << c.cma_cov_rate << "\n"
    << "tail_init = " << (c.tail_init == TailInit::Zero ? "zero" : "repeat") << "\n"
    << "input_smoothing = " << c.input_smoothing << "\n"
    << "trials = " << c.trials << "\n"
    << "seed = " << c.seed << "\n";
  if (!c.track.empty()) o << "track = " << c.track << "\n";
  o << "laps = " << c.laps << "\n"
    << "max_steps = " << c.max_steps << "\n"
    << "initial_speed = " << c.initial_speed << "\n";
  return o.str();
}

}  // namespace mpopi
