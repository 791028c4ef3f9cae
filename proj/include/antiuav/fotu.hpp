#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "antiuav/event_io.hpp"
#include "antiuav/rpu.hpp"

namespace antiuav {

struct TrajectoryPoint {
  Timestamp t = 0;
  double cx = 0.0;
  double cy = 0.0;

  bool operator==(const TrajectoryPoint&) const = default;
};

struct Trajectory {
  int object_id = 0;
  std::vector<TrajectoryPoint> points;

  bool operator==(const Trajectory&) const = default;
};

struct FotuConfig {
  double speed_route_threshold = 20.0;  // px/s
  double trajectory_step = 4.0;         // px
  double th_gain_size = 2.0;
  double th_gain_speed = 0.05;
  std::size_t monitors = 32;

  // Throws InvalidConfig.
  void validate() const;

  bool operator==(const FotuConfig&) const = default;
};

// TH = clamp(round(gain_size * sqrt(size) + gain_speed * speed), th_min, th_max)
// with the clamp bounds taken from the RPU configuration.
int adapt_threshold(double rp_size, double speed, const FotuConfig& config, const RpuConfig& bounds);

enum class AppendResult { Appended, Unchanged };

// Records (t, cx, cy) iff the trajectory is empty or the Euclidean step from
// the last stored point exceeds trajectory_step. Throws NonMonotonicTime.
AppendResult append_trajectory_point(Trajectory& trajectory, Timestamp t, double cx, double cy,
                                     const FotuConfig& config);

enum class ClassificationRoute { Patch, Trajectory };

const char* to_string(ClassificationRoute route);

// Patch below the threshold, Trajectory at or above it.
ClassificationRoute route_classification(double speed, const FotuConfig& config);

// The bank of RP monitors. Each monitor follows one track: it recalibrates
// the track's TH on every event-mode commit and records its trajectory.
class Fotu {
 public:
  Fotu(FotuConfig config, RpuConfig bounds);

  const FotuConfig& config() const { return config_; }

  // Called on every event-mode commit. Returns the recalibrated TH.
  int on_commit(const RegionProposal& rp, Timestamp now);
  // Frees the monitor of a retired or merged-away track.
  void release(int track_id);

  bool monitored(int track_id) const { return monitors_.contains(track_id); }
  const Trajectory* trajectory(int track_id) const;
  // Trajectories of every track ever monitored, ordered by track id.
  std::vector<Trajectory> all_trajectories() const;
  std::size_t unmonitored_tracks() const { return unmonitored_.size(); }

  bool operator==(const Fotu&) const = default;

 private:
  FotuConfig config_;
  RpuConfig bounds_;
  std::map<int, Trajectory> monitors_;  // live monitors
  std::map<int, Trajectory> archive_;   // released monitors
  std::set<int> unmonitored_;           // tracks that found every monitor busy
};

}  // namespace antiuav
