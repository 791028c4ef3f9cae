#include "antiuav/fotu.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include "antiuav/error.hpp"

namespace antiuav {

void FotuConfig::validate() const {
  if (speed_route_threshold <= 0.0) throw Error(ErrorCode::InvalidConfig, "fotu.speed_route_threshold must be positive");
  if (trajectory_step <= 0.0) throw Error(ErrorCode::InvalidConfig, "fotu.trajectory_step must be positive");
  if (th_gain_size < 0.0 || th_gain_speed < 0.0) throw Error(ErrorCode::InvalidConfig, "fotu TH gains must be non-negative");
  if (monitors < 1) throw Error(ErrorCode::InvalidConfig, "fotu.monitors must be >= 1");
}

int adapt_threshold(double rp_size, double speed, const FotuConfig& config, const RpuConfig& bounds) {
  const double raw = config.th_gain_size * std::sqrt(std::max(rp_size, 0.0)) +
                     config.th_gain_speed * std::max(speed, 0.0);
  const auto rounded = static_cast<long long>(std::llround(raw));
  return static_cast<int>(std::clamp<long long>(rounded, bounds.th_min, bounds.th_max));
}

AppendResult append_trajectory_point(Trajectory& trajectory, Timestamp t, double cx, double cy,
                                     const FotuConfig& config) {
  if (trajectory.points.empty()) {
    trajectory.points.push_back({t, cx, cy});
    return AppendResult::Appended;
  }
  const auto& last = trajectory.points.back();
  if (t <= last.t) {
    throw Error(ErrorCode::NonMonotonicTime, "trajectory point at " + std::to_string(t) +
                                                 " does not follow " + std::to_string(last.t));
  }
  if (std::hypot(cx - last.cx, cy - last.cy) > config.trajectory_step) {
    trajectory.points.push_back({t, cx, cy});
    return AppendResult::Appended;
  }
  return AppendResult::Unchanged;
}

const char* to_string(ClassificationRoute route) {
  return route == ClassificationRoute::Patch ? "patch" : "trajectory";
}

ClassificationRoute route_classification(double speed, const FotuConfig& config) {
  return speed < config.speed_route_threshold ? ClassificationRoute::Patch : ClassificationRoute::Trajectory;
}

Fotu::Fotu(FotuConfig config, RpuConfig bounds) : config_(config), bounds_(bounds) { config_.validate(); }

int Fotu::on_commit(const RegionProposal& rp, Timestamp now) {
  auto it = monitors_.find(rp.id);
  if (it == monitors_.end() && !unmonitored_.contains(rp.id)) {
    if (monitors_.size() < config_.monitors) {
      it = monitors_.emplace(rp.id, Trajectory{rp.id, {}}).first;
    } else {
      unmonitored_.insert(rp.id);
      std::clog << "fotu: all " << config_.monitors << " monitors busy, track " << rp.id
                << " is not trajectory-recorded\n";
    }
  }
  if (it != monitors_.end()) {
    auto& traj = it->second;
    if (traj.points.empty() || now > traj.points.back().t) {
      append_trajectory_point(traj, now, rp.bbox.center_x(), rp.bbox.center_y(), config_);
    }
  }
  return adapt_threshold(static_cast<double>(rp.bbox.area()), rp.speed(), config_, bounds_);
}

void Fotu::release(int track_id) {
  auto node = monitors_.extract(track_id);
  if (!node.empty()) archive_.insert(std::move(node));
}

const Trajectory* Fotu::trajectory(int track_id) const {
  if (auto it = monitors_.find(track_id); it != monitors_.end()) return &it->second;
  if (auto it = archive_.find(track_id); it != archive_.end()) return &it->second;
  return nullptr;
}

std::vector<Trajectory> Fotu::all_trajectories() const {
  std::map<int, Trajectory> merged = archive_;
  merged.insert(monitors_.begin(), monitors_.end());
  std::vector<Trajectory> out;
  out.reserve(merged.size());
  for (auto& [id, traj] : merged) out.push_back(traj);
  return out;
}

}  // namespace antiuav
