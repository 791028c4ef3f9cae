#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "antiuav/box.hpp"
#include "antiuav/event_io.hpp"
#include "antiuav/rle.hpp"

namespace antiuav {

enum class TrackMode { Frame, Event };

const char* to_string(TrackMode mode);

struct RpuConfig {
  int validity_min_pixels = 10;  // "exceeds nine pixels"
  int margin = 4;                // search-window dilation around the bbox
  bool periodic_rescan = true;
  double rescan_period_s = 5.0;  // 5..30 when periodic_rescan is on
  std::size_t max_proposals = 32;
  int th_min = 4;
  int th_max = 64;
  double velocity_alpha = 0.5;       // EMA weight of the newest velocity sample
  double velocity_baseline_s = 0.05; // minimum time between velocity samples
  double retire_after_periods = 2.0; // idle event-mode RPs die after this many rescan periods

  Timestamp rescan_period_us() const;
  Timestamp retire_after_us() const;
  // Throws InvalidConfig.
  void validate() const;

  bool operator==(const RpuConfig&) const = default;
};

struct RegionProposal {
  int id = 0;
  Box bbox;
  TrackMode mode = TrackMode::Frame;
  int active_pixels = 0;
  int match_count = 0;
  int th = 4;
  std::optional<Box> matched_extent;
  Timestamp last_update_t = 0;
  Timestamp last_match_t = 0;
  double vx = 0.0;  // px/s
  double vy = 0.0;
  bool has_velocity = false;
  // Reference point of the pending velocity sample.
  double anchor_cx = 0.0;
  double anchor_cy = 0.0;
  Timestamp anchor_t = 0;
  bool has_anchor = false;
  std::size_t commits = 0;

  double speed() const;
  bool operator==(const RegionProposal&) const = default;
};

struct SliceMergeResult {
  std::vector<RegionProposal> proposals;  // ordered by first slice, ids 0..n-1
  std::size_t dropped = 0;                // components beyond max_proposals
};

// Single pass over row-ordered slices, union-find over open components,
// 8-connectivity. Over capacity, the largest components by active pixel count
// are kept and the rest counted in `dropped`.
SliceMergeResult merge_slices_to_rps(std::span<const Slice> slices, const RpuConfig& config);

// Keeps RPs with active_pixels >= validity_min_pixels and promotes them to
// event mode.
std::vector<RegionProposal> filter_valid_rps(std::span<const RegionProposal> rps, const RpuConfig& config);

enum class MatchResult { Matched, NotMatched };

MatchResult match_event(RegionProposal& rp, const Event& event, const RpuConfig& config);

// Replaces the bbox by the extent of the matched events and refreshes the
// velocity estimate. Throws PrematureCommit when match_count < th.
RegionProposal commit_rp_update(const RegionProposal& rp, Timestamp now, const RpuConfig& config);

// Unions RPs whose margin-dilated boxes intersect, to a fixpoint. The lower id
// survives; bboxes are united and active pixels summed.
std::vector<RegionProposal> merge_rps(std::span<const RegionProposal> rps, int margin);

enum class SchedulerAction { BuildFrame, StayEventMode };

struct SchedulerState {
  bool has_valid_rps = false;
  Timestamp last_rescan_t = 0;
};

SchedulerAction mode_scheduler(const SchedulerState& state, Timestamp now, const RpuConfig& config);

}  // namespace antiuav
