#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace mpopi {

class TrackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrackProjection {
  double lateral = 0.0;     // signed offset d, positive left of the direction of travel
  double arclength = 0.0;   // s of the projected point
  bool inside = false;      // |d| <= half width (inclusive)
  std::size_t segment = 0;  // segment holding the projection
};

/// Piecewise-linear centerline with per-point half widths. Segment i runs
/// from point i to point i+1; a closed track adds the segment last -> first.
class Track {
 public:
  Track(std::vector<Eigen::Vector2d> centerline, std::vector<double> half_width, bool closed);

  const std::vector<Eigen::Vector2d>& centerline() const { return points_; }
  const std::vector<double>& half_width() const { return half_width_; }
  /// Cumulative arclength at each point; arclength()[0] == 0.
  const std::vector<double>& arclength() const { return cumulative_; }
  double length() const { return length_; }
  bool closed() const { return closed_; }
  std::size_t segments() const { return closed_ ? points_.size() : points_.size() - 1; }

  /// Nearest-segment projection over the whole centerline.
  TrackProjection project(const Eigen::Vector2d& pos) const;

  /// Projection restricted to segments within `window` of `hint` (wrapping
  /// on closed tracks). Agrees with project() while the car stays near the
  /// hinted segment.
  TrackProjection project_near(const Eigen::Vector2d& pos, std::size_t hint,
                               std::size_t window = 8) const;

  /// Centerline point and unit tangent at arclength s (wrapped when closed).
  Eigen::Vector2d point_at(double s) const;
  Eigen::Vector2d tangent_at(double s) const;

 private:
  void project_segment(const Eigen::Vector2d& pos, std::size_t i, double& best_dist2,
                       TrackProjection& best) const;
  std::size_t segment_at(double& s) const;

  std::vector<Eigen::Vector2d> points_;
  std::vector<double> half_width_;
  std::vector<double> cumulative_;
  double length_ = 0.0;
  bool closed_ = false;
};

TrackProjection track_project(const Track& track, const Eigen::Vector2d& pos);

/// Parses track definition text: one `x_m, y_m, half_width_m` point per
/// line, `#` starts a comment. A track whose first and last points lie within
/// 1 m is closed; an exact repeat of the first point is dropped.
Track parse_track(const std::string& text, bool require_closed = false);

/// Reads and parses a track file. Errors carry the path.
Track make_track(const std::string& path, bool require_closed = false);

/// Resolves a possibly relative track path against the bundled data directory.
std::string resolve_track_path(const std::string& path);

}  // namespace mpopi
