#include "antiuav/rpu.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "antiuav/error.hpp"

namespace antiuav {

const char* to_string(TrackMode mode) { return mode == TrackMode::Frame ? "frame" : "event"; }

Timestamp RpuConfig::rescan_period_us() const {
  return static_cast<Timestamp>(std::llround(rescan_period_s * 1e6));
}

Timestamp RpuConfig::retire_after_us() const {
  return static_cast<Timestamp>(std::llround(retire_after_periods * rescan_period_s * 1e6));
}

void RpuConfig::validate() const {
  if (validity_min_pixels < 1) throw Error(ErrorCode::InvalidConfig, "rpu.validity_min_pixels must be >= 1");
  if (margin < 0) throw Error(ErrorCode::InvalidConfig, "rpu.margin must be >= 0");
  if (periodic_rescan && (rescan_period_s < 5.0 || rescan_period_s > 30.0)) {
    throw Error(ErrorCode::InvalidConfig, "rpu.rescan_period_s must lie in [5, 30]");
  }
  if (!periodic_rescan && rescan_period_s <= 0.0) {
    throw Error(ErrorCode::InvalidConfig, "rpu.rescan_period_s must be positive");
  }
  if (max_proposals < 1) throw Error(ErrorCode::InvalidConfig, "rpu.max_proposals must be >= 1");
  if (th_min < 1 || th_max < th_min) throw Error(ErrorCode::InvalidConfig, "rpu TH bounds must satisfy 1 <= th_min <= th_max");
  if (velocity_alpha <= 0.0 || velocity_alpha > 1.0) throw Error(ErrorCode::InvalidConfig, "rpu.velocity_alpha must lie in (0, 1]");
  if (velocity_baseline_s < 0.0) throw Error(ErrorCode::InvalidConfig, "rpu.velocity_baseline_s must be >= 0");
  if (retire_after_periods <= 0.0) throw Error(ErrorCode::InvalidConfig, "rpu.retire_after_periods must be positive");
}

double RegionProposal::speed() const { return std::hypot(vx, vy); }

namespace {

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), std::size_t{0}); }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  // The smaller index becomes the root so roots stay at a component's first slice.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

SliceMergeResult merge_slices_to_rps(std::span<const Slice> slices, const RpuConfig& config) {
  const std::size_t n = slices.size();
  DisjointSet sets(n);

  std::size_t prev_begin = 0, prev_end = 0;  // slices of row (current - 1)
  std::size_t i = 0;
  while (i < n) {
    const int row = slices[i].row;
    std::size_t row_end = i;
    while (row_end < n && slices[row_end].row == row) ++row_end;
    const bool adjacent = prev_end > prev_begin && slices[prev_begin].row == row - 1;
    if (adjacent) {
      std::size_t j = prev_begin;
      for (std::size_t k = i; k < row_end; ++k) {
        const auto& s = slices[k];
        while (j < prev_end && slices[j].x_end < s.x_start - 1) ++j;
        for (std::size_t p = j; p < prev_end && slices[p].x_start <= s.x_end + 1; ++p) sets.unite(k, p);
      }
    }
    prev_begin = i;
    prev_end = row_end;
    i = row_end;
  }

  // Roots are the first slice of each component, so root order is row-major.
  std::vector<std::size_t> slot(n, n);
  std::vector<RegionProposal> components;
  for (std::size_t k = 0; k < n; ++k) {
    const auto root = sets.find(k);
    const auto& s = slices[k];
    if (slot[root] == n) {
      slot[root] = components.size();
      RegionProposal rp;
      rp.bbox = {s.x_start, s.row, s.x_end, s.row};
      components.push_back(rp);
    }
    auto& rp = components[slot[root]];
    rp.bbox.include(s.x_start, s.row);
    rp.bbox.include(s.x_end, s.row);
    rp.active_pixels += s.length();
  }

  SliceMergeResult result;
  if (components.size() > config.max_proposals) {
    std::vector<std::size_t> order(components.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return components[a].active_pixels > components[b].active_pixels;
    });
    order.resize(config.max_proposals);
    std::sort(order.begin(), order.end());
    result.dropped = components.size() - config.max_proposals;
    for (auto idx : order) result.proposals.push_back(components[idx]);
  } else {
    result.proposals = std::move(components);
  }
  for (std::size_t k = 0; k < result.proposals.size(); ++k) result.proposals[k].id = static_cast<int>(k);
  return result;
}

std::vector<RegionProposal> filter_valid_rps(std::span<const RegionProposal> rps, const RpuConfig& config) {
  std::vector<RegionProposal> valid;
  for (const auto& rp : rps) {
    if (rp.active_pixels < config.validity_min_pixels) continue;
    auto promoted = rp;
    promoted.mode = TrackMode::Event;
    valid.push_back(promoted);
  }
  return valid;
}

MatchResult match_event(RegionProposal& rp, const Event& event, const RpuConfig& config) {
  if (rp.mode != TrackMode::Event || !rp.bbox.dilated(config.margin).contains(event.x, event.y)) {
    return MatchResult::NotMatched;
  }
  ++rp.match_count;
  if (rp.matched_extent) {
    rp.matched_extent->include(event.x, event.y);
  } else {
    rp.matched_extent = Box::point(event.x, event.y);
  }
  rp.last_match_t = event.t;
  return MatchResult::Matched;
}

RegionProposal commit_rp_update(const RegionProposal& rp, Timestamp now, const RpuConfig& config) {
  if (rp.match_count < rp.th || !rp.matched_extent) {
    throw Error(ErrorCode::PrematureCommit,
                "match_count " + std::to_string(rp.match_count) + " < th " + std::to_string(rp.th),
                static_cast<std::size_t>(rp.id));
  }
  RegionProposal next = rp;
  next.bbox = *rp.matched_extent;
  next.matched_extent.reset();
  next.match_count = 0;
  next.last_update_t = now;
  ++next.commits;

  const double cx = next.bbox.center_x();
  const double cy = next.bbox.center_y();
  if (!next.has_anchor) {
    next.anchor_cx = cx;
    next.anchor_cy = cy;
    next.anchor_t = now;
    next.has_anchor = true;
    return next;
  }
  const auto baseline = static_cast<Timestamp>(std::llround(config.velocity_baseline_s * 1e6));
  if (now <= next.anchor_t || now - next.anchor_t < baseline) return next;

  const double dt = static_cast<double>(now - next.anchor_t) / 1e6;
  const double raw_vx = (cx - next.anchor_cx) / dt;
  const double raw_vy = (cy - next.anchor_cy) / dt;
  if (next.has_velocity) {
    next.vx = config.velocity_alpha * raw_vx + (1.0 - config.velocity_alpha) * next.vx;
    next.vy = config.velocity_alpha * raw_vy + (1.0 - config.velocity_alpha) * next.vy;
  } else {
    next.vx = raw_vx;
    next.vy = raw_vy;
    next.has_velocity = true;
  }
  next.anchor_cx = cx;
  next.anchor_cy = cy;
  next.anchor_t = now;
  return next;
}

namespace {

void absorb(RegionProposal& survivor, const RegionProposal& other) {
  survivor.bbox = survivor.bbox.united(other.bbox);
  survivor.active_pixels += other.active_pixels;
  if (other.mode == TrackMode::Event) survivor.mode = TrackMode::Event;
  survivor.last_match_t = std::max(survivor.last_match_t, other.last_match_t);
}

}  // namespace

std::vector<RegionProposal> merge_rps(std::span<const RegionProposal> rps, int margin) {
  std::vector<RegionProposal> out(rps.begin(), rps.end());
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < out.size() && !changed; ++i) {
      for (std::size_t j = i + 1; j < out.size(); ++j) {
        if (!out[i].bbox.dilated(margin).intersects(out[j].bbox.dilated(margin))) continue;
        if (out[j].id < out[i].id) std::swap(out[i], out[j]);
        absorb(out[i], out[j]);
        out.erase(out.begin() + static_cast<std::ptrdiff_t>(j));
        changed = true;
        break;
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

SchedulerAction mode_scheduler(const SchedulerState& state, Timestamp now, const RpuConfig& config) {
  if (!state.has_valid_rps) return SchedulerAction::BuildFrame;
  if (config.periodic_rescan && now >= state.last_rescan_t &&
      now - state.last_rescan_t >= config.rescan_period_us()) {
    return SchedulerAction::BuildFrame;
  }
  return SchedulerAction::StayEventMode;
}

}  // namespace antiuav
