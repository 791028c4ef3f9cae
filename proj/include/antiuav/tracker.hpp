#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "antiuav/event_io.hpp"
#include "antiuav/fotu.hpp"
#include "antiuav/frame_builder.hpp"
#include "antiuav/rpu.hpp"

namespace antiuav {

// One row of the tracker result stream
// (`t,object_id,x_min,y_min,x_max,y_max,mode`).
struct TrackResultRow {
  Timestamp t = 0;
  int object_id = 0;
  Box bbox;
  TrackMode mode = TrackMode::Frame;

  bool operator==(const TrackResultRow&) const = default;
};

std::string serialize_track_rows(const std::vector<TrackResultRow>& rows, bool with_header = true);
std::vector<TrackResultRow> parse_track_rows(std::string_view text);

enum class TrackUpdateKind { Created, Commit, Merged, Retired };

struct TrackUpdate {
  TrackUpdateKind kind = TrackUpdateKind::Created;
  Timestamp t = 0;
  RegionProposal rp;       // state after the update (before removal for Merged/Retired)
  int absorbed_by = -1;    // Merged only
};

struct TrackerStats {
  std::size_t events = 0;
  std::size_t frames_built = 0;
  std::size_t commits = 0;
  std::size_t matched_events = 0;
  std::size_t dropped_components = 0;
  std::size_t tracks_created = 0;
  std::size_t tracks_retired = 0;

  bool operator==(const TrackerStats&) const = default;
};

struct TrackerState {
  std::vector<RegionProposal> proposals;  // PE slots, ascending id
  int next_id = 0;
  Timestamp last_t = 0;
  Timestamp last_rescan_t = 0;
  bool window_open = false;
  Timestamp window_start = 0;
  std::vector<Event> window_events;
  TrackerStats stats;
  std::vector<TrackResultRow> results;

  bool operator==(const TrackerState&) const = default;
};

// Hybrid frame/event tracker. Events must be fed in timestamp order by a
// single writer; snapshot() may be handed to concurrent readers.
class HybridTracker {
 public:
  HybridTracker(SensorGeometry geometry, Timestamp frame_interval, RpuConfig rpu, FotuConfig fotu);

  // Appends the updates caused by this event to `updates`.
  void process(const Event& event, std::vector<TrackUpdate>& updates);
  // Closes a pending frame window.
  void finish(std::vector<TrackUpdate>& updates);

  const TrackerState& state() const { return state_; }
  TrackerState snapshot() const { return state_; }
  const Fotu& fotu() const { return fotu_; }
  const RpuConfig& rpu_config() const { return rpu_; }
  const SensorGeometry& geometry() const { return geometry_; }

  bool operator==(const HybridTracker&) const = default;

 private:
  void close_window(std::vector<TrackUpdate>& updates);
  void retire_idle(Timestamp now, std::vector<TrackUpdate>& updates);
  void match(const Event& event, std::vector<TrackUpdate>& updates);

  SensorGeometry geometry_;
  Timestamp frame_interval_;
  RpuConfig rpu_;
  Fotu fotu_;
  TrackerState state_;
};

}  // namespace antiuav
