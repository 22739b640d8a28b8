#include "mpopi/env/track.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace mpopi {

namespace {

constexpr double kDuplicateTol = 1e-9;
constexpr double kClosureDistance = 1.0;

double cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

Track::Track(std::vector<Eigen::Vector2d> centerline, std::vector<double> half_width, bool closed)
    : points_(std::move(centerline)), half_width_(std::move(half_width)), closed_(closed) {
  if (points_.size() < 3) throw TrackError("track needs at least 3 points");
  if (half_width_.size() != points_.size()) {
    throw TrackError("track needs one half width per point");
  }
  cumulative_.assign(points_.size(), 0.0);
  for (std::size_t i = 0; i < segments(); ++i) {
    const auto& a = points_[i];
    const auto& b = points_[(i + 1) % points_.size()];
    const double len = (b - a).norm();
    if (!(len > kDuplicateTol)) {
      throw TrackError("duplicate consecutive track points at index " + std::to_string(i));
    }
    if (i + 1 < points_.size()) cumulative_[i + 1] = cumulative_[i] + len;
    length_ = (i + 1 < points_.size()) ? cumulative_[i + 1] : cumulative_[i] + len;
  }
  for (double w : half_width_) {
    if (!(w > 0.0)) throw TrackError("half width must be positive");
  }
}

void Track::project_segment(const Eigen::Vector2d& pos, std::size_t i, double& best_dist2,
                            TrackProjection& best) const {
  const std::size_t j = (i + 1) % points_.size();
  const Eigen::Vector2d& a = points_[i];
  const Eigen::Vector2d ab = points_[j] - a;
  const double len2 = ab.squaredNorm();
  const double t = std::clamp((pos - a).dot(ab) / len2, 0.0, 1.0);
  const Eigen::Vector2d foot = a + t * ab;
  const double dist2 = (pos - foot).squaredNorm();
  if (dist2 < best_dist2) {
    best_dist2 = dist2;
    const double len = std::sqrt(len2);
    const double dist = std::sqrt(dist2);
    const double side = cross(ab, pos - foot);
    best.lateral = side < 0.0 ? -dist : dist;
    best.arclength = cumulative_[i] + t * len;
    const double hw = (1.0 - t) * half_width_[i] + t * half_width_[j];
    best.inside = dist <= hw;
    best.segment = i;
  }
}

TrackProjection Track::project(const Eigen::Vector2d& pos) const {
  TrackProjection best;
  double best_dist2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segments(); ++i) project_segment(pos, i, best_dist2, best);
  return best;
}

TrackProjection Track::project_near(const Eigen::Vector2d& pos, std::size_t hint,
                                    std::size_t window) const {
  const std::size_t n = segments();
  if (2 * window + 1 >= n) return project(pos);
  TrackProjection best;
  double best_dist2 = std::numeric_limits<double>::infinity();
  if (closed_) {
    for (std::size_t o = 0; o <= 2 * window; ++o) {
      project_segment(pos, (hint + n - window + o) % n, best_dist2, best);
    }
  } else {
    const std::size_t lo = hint > window ? hint - window : 0;
    const std::size_t hi = std::min(n - 1, hint + window);
    for (std::size_t i = lo; i <= hi; ++i) project_segment(pos, i, best_dist2, best);
  }
  return best;
}

std::size_t Track::segment_at(double& s) const {
  if (closed_) {
    s = std::fmod(s, length_);
    if (s < 0.0) s += length_;
  } else {
    s = std::clamp(s, 0.0, length_);
  }
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  std::size_t i = static_cast<std::size_t>(std::distance(cumulative_.begin(), it)) - 1;
  return std::min(i, segments() - 1);
}

Eigen::Vector2d Track::point_at(double s) const {
  const std::size_t i = segment_at(s);
  const Eigen::Vector2d& a = points_[i];
  const Eigen::Vector2d& b = points_[(i + 1) % points_.size()];
  return a + (b - a).normalized() * (s - cumulative_[i]);
}

Eigen::Vector2d Track::tangent_at(double s) const {
  const std::size_t i = segment_at(s);
  return (points_[(i + 1) % points_.size()] - points_[i]).normalized();
}

TrackProjection track_project(const Track& track, const Eigen::Vector2d& pos) {
  return track.project(pos);
}

Track parse_track(const std::string& text, bool require_closed) {
  std::vector<Eigen::Vector2d> pts;
  std::vector<double> widths;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell = trim(cell);
      std::size_t used = 0;
      double value = 0.0;
      try {
        value = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (cell.empty() || used != cell.size() || !std::isfinite(value)) {
        throw TrackError("line " + std::to_string(lineno) + ": bad number '" + cell + "'");
      }
      fields.push_back(value);
    }
    if (fields.size() != 3) {
      throw TrackError("line " + std::to_string(lineno) + ": expected x, y, half_width");
    }
    Eigen::Vector2d p(fields[0], fields[1]);
    if (!pts.empty() && (p - pts.back()).norm() <= kDuplicateTol) {
      throw TrackError("line " + std::to_string(lineno) + ": duplicate consecutive point");
    }
    pts.push_back(p);
    widths.push_back(fields[2]);
  }
  if (pts.size() < 3) throw TrackError("track needs at least 3 points");

  const double gap = (pts.back() - pts.front()).norm();
  const bool closed = gap <= kClosureDistance;
  if (closed && gap <= kDuplicateTol) {
    pts.pop_back();
    widths.pop_back();
  }
  if (require_closed && !closed) throw TrackError("track is open but a closed track is required");
  return Track(std::move(pts), std::move(widths), closed);
}

Track make_track(const std::string& path, bool require_closed) {
  std::ifstream f(resolve_track_path(path));
  if (!f) throw TrackError("cannot open track file '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  try {
    return parse_track(buf.str(), require_closed);
  } catch (const TrackError& e) {
    throw TrackError(path + ": " + e.what());
  }
}

std::string resolve_track_path(const std::string& path) {
  namespace fs = std::filesystem;
  if (fs::exists(path)) return path;
  const fs::path bundled = fs::path(MPOPI_DATA_DIR) / path;
  if (fs::exists(bundled)) return bundled.string();
  const fs::path in_tracks = fs::path(MPOPI_DATA_DIR) / "tracks" / path;
  if (fs::exists(in_tracks)) return in_tracks.string();
  return path;
}

}  // namespace mpopi
