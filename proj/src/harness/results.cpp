#include "mpopi/harness/results.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mpopi {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Free-text fields may carry commas or quotes (error messages).
std::string quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cells.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back();
    } else if (ch != '\r') {
      cells.back() += ch;
    }
  }
  return cells;
}

void open_or_throw(std::ofstream& f, const std::filesystem::path& p) {
  f.open(p);
  if (!f) throw std::runtime_error("cannot write " + p.string());
}

}  // namespace

const std::vector<std::string>& trial_columns() {
  static const std::vector<std::string> cols{
      "trial", "seed",  "env",  "algo",           "ais",             "K",
      "L",     "T",     "effective_samples",      "total_reward",    "steps",
      "laps",  "beta_violation", "track_violation", "wall_time_s",   "fail_reason"};
  return cols;
}

void write_trials_csv(std::ostream& out, std::span<const TrialRecord> records) {
  const auto& cols = trial_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << "\n";
  for (const TrialRecord& r : records) {
    out << r.trial << ',' << r.seed << ',' << quote(r.env) << ',' << r.algo << ',' << r.ais << ','
        << r.K << ',' << r.L << ',' << r.T << ',' << r.effective_samples << ','
        << fmt(r.total_reward) << ',' << r.steps << ',' << r.laps << ',' << r.beta_violation
        << ',' << r.track_violation << ',' << fmt(r.wall_time_s) << ',' << quote(r.fail_reason)
        << "\n";
  }
}

std::vector<TrialRecord> read_trials_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("trials.csv: missing header");
  if (split_csv(line) != trial_columns()) throw std::runtime_error("trials.csv: unexpected header");
  std::vector<TrialRecord> out;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split_csv(line);
    if (c.size() != trial_columns().size()) {
      throw std::runtime_error("trials.csv line " + std::to_string(lineno) + ": wrong field count");
    }
    try {
      TrialRecord r;
      r.trial = std::stoi(c[0]);
      r.seed = std::stoull(c[1]);
      r.env = c[2];
      r.algo = c[3];
      r.ais = c[4];
      r.K = std::stoi(c[5]);
      r.L = std::stoi(c[6]);
      r.T = std::stoi(c[7]);
      r.effective_samples = std::stoi(c[8]);
      r.total_reward = std::stod(c[9]);
      r.steps = std::stoi(c[10]);
      r.laps = std::stoi(c[11]);
      r.beta_violation = std::stoi(c[12]) != 0;
      r.track_violation = std::stoi(c[13]) != 0;
      r.wall_time_s = std::stod(c[14]);
      r.fail_reason = c[15];
      out.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw std::runtime_error("trials.csv line " + std::to_string(lineno) + ": bad number");
    }
  }
  return out;
}

void write_summary_csv(std::ostream& out, std::span<const LevelSummary> levels) {
  out << "level,algo,ais,K,L,effective_samples,trials,mean_reward,reward_ci_half_width,"
         "mean_steps,steps_ci_half_width,completion_rate,beta_violation_rate,"
         "track_violation_rate,mean_wall_time_s\n";
  for (const LevelSummary& s : levels) {
    out << s.level << ',' << s.algo << ',' << s.ais << ',' << s.K << ',' << s.L << ','
        << s.effective_samples << ',' << s.trials << ',' << fmt(s.mean_reward) << ','
        << fmt(s.reward_ci) << ',' << fmt(s.mean_steps) << ',' << fmt(s.steps_ci) << ','
        << fmt(s.completion_rate) << ',' << fmt(s.beta_violation_rate) << ','
        << fmt(s.track_violation_rate) << ',' << fmt(s.mean_wall_time_s) << "\n";
  }
}

void write_summary_gnuplot(std::ostream& out, std::span<const LevelSummary> levels) {
  out << "# level mean ci_low ci_high\n";
  for (const LevelSummary& s : levels) {
    out << s.level << ' ' << fmt(s.mean_reward) << ' ' << fmt(s.mean_reward - s.reward_ci) << ' '
        << fmt(s.mean_reward + s.reward_ci) << "\n";
  }
}

void emit_results(const std::string& dir, std::span<const TrialRecord> records,
                  std::span<const LevelSummary> levels) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  const fs::path root(dir);
  std::ofstream trials, summary, plot;
  open_or_throw(trials, root / "trials.csv");
  write_trials_csv(trials, records);
  open_or_throw(summary, root / "summary.csv");
  write_summary_csv(summary, levels);
  open_or_throw(plot, root / "summary.gnuplot.dat");
  write_summary_gnuplot(plot, levels);
  if (!trials || !summary || !plot) throw std::runtime_error("write failed under " + dir);
}

}  // namespace mpopi
