#include "antiuav/tracker.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "antiuav/error.hpp"
#include "antiuav/rle.hpp"

namespace antiuav {

std::string serialize_track_rows(const std::vector<TrackResultRow>& rows, bool with_header) {
  std::ostringstream out;
  if (with_header) out << "t,object_id,x_min,y_min,x_max,y_max,mode\n";
  for (const auto& r : rows) {
    out << r.t << ',' << r.object_id << ',' << r.bbox.x_min << ',' << r.bbox.y_min << ',' << r.bbox.x_max
        << ',' << r.bbox.y_max << ',' << to_string(r.mode) << '\n';
  }
  return out.str();
}

std::vector<TrackResultRow> parse_track_rows(std::string_view text) {
  std::vector<TrackResultRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.rfind("t,", 0) == 0) continue;
    std::istringstream ls(line);
    TrackResultRow r;
    std::string mode;
    char c1, c2, c3, c4, c5, c6;
    if (!(ls >> r.t >> c1 >> r.object_id >> c2 >> r.bbox.x_min >> c3 >> r.bbox.y_min >> c4 >> r.bbox.x_max >>
          c5 >> r.bbox.y_max >> c6) ||
        c1 != ',' || c2 != ',' || c3 != ',' || c4 != ',' || c5 != ',' || c6 != ',' || !std::getline(ls, mode)) {
      throw Error(ErrorCode::MalformedLine, "expected t,object_id,x_min,y_min,x_max,y_max,mode", line_no);
    }
    if (mode == "frame") {
      r.mode = TrackMode::Frame;
    } else if (mode == "event") {
      r.mode = TrackMode::Event;
    } else {
      throw Error(ErrorCode::MalformedLine, "unknown mode '" + mode + "'", line_no);
    }
    rows.push_back(r);
  }
  return rows;
}

HybridTracker::HybridTracker(SensorGeometry geometry, Timestamp frame_interval, RpuConfig rpu, FotuConfig fotu)
    : geometry_(geometry), frame_interval_(frame_interval), rpu_(rpu), fotu_(fotu, rpu) {
  if (!geometry.valid()) throw Error(ErrorCode::InvalidConfig, "sensor geometry must be at least 1x1");
  if (frame_interval == 0) throw Error(ErrorCode::InvalidConfig, "frame interval must be positive");
  rpu_.validate();
}

void HybridTracker::process(const Event& event, std::vector<TrackUpdate>& updates) {
  if (state_.stats.events > 0 && event.t < state_.last_t) {
    throw Error(ErrorCode::NonMonotonicTime, "event at " + std::to_string(event.t), state_.stats.events);
  }
  if (!geometry_.contains(event.x, event.y)) throw Error(ErrorCode::OutOfBounds, "", state_.stats.events);
  state_.last_t = event.t;
  ++state_.stats.events;

  if (state_.window_open && event.t >= state_.window_start + frame_interval_) close_window(updates);
  retire_idle(event.t, updates);

  if (!state_.window_open) {
    const SchedulerState sched{!state_.proposals.empty(), state_.last_rescan_t};
    if (mode_scheduler(sched, event.t, rpu_) == SchedulerAction::BuildFrame) {
      state_.window_open = true;
      state_.window_start = event.t;
      state_.last_rescan_t = event.t;
      state_.window_events.clear();
    }
  }
  if (state_.window_open) state_.window_events.push_back(event);
  match(event, updates);
}

void HybridTracker::finish(std::vector<TrackUpdate>& updates) {
  if (state_.window_open) close_window(updates);
}

void HybridTracker::match(const Event& event, std::vector<TrackUpdate>& updates) {
  auto& rps = state_.proposals;
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < rps.size(); ++i) {
    if (match_event(rps[i], event, rpu_) == MatchResult::Matched) hits.push_back(i);
  }
  if (hits.empty()) return;
  ++state_.stats.matched_events;

  std::size_t slot = hits.front();
  if (hits.size() > 1) {
    // Several PEs answered the same event: the controller fuses their RPs.
    std::vector<RegionProposal> responders;
    for (auto i : hits) responders.push_back(rps[i]);
    const auto fused = merge_rps(responders, rpu_.margin);
    const auto& survivor = fused.front();
    for (auto i : hits) {
      if (rps[i].id == survivor.id) continue;
      updates.push_back({TrackUpdateKind::Merged, event.t, rps[i], survivor.id});
      fotu_.release(rps[i].id);
    }
    for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
      if (rps[*it].id != survivor.id) rps.erase(rps.begin() + static_cast<std::ptrdiff_t>(*it));
    }
    slot = static_cast<std::size_t>(std::find_if(rps.begin(), rps.end(), [&](const auto& rp) {
                                      return rp.id == survivor.id;
                                    }) - rps.begin());
    rps[slot] = survivor;
  }

  auto& rp = rps[slot];
  if (rp.match_count >= rp.th) {
    rp = commit_rp_update(rp, event.t, rpu_);
    rp.th = fotu_.on_commit(rp, event.t);
    ++state_.stats.commits;
    state_.results.push_back({event.t, rp.id, rp.bbox, TrackMode::Event});
    updates.push_back({TrackUpdateKind::Commit, event.t, rp, -1});
  }
}

void HybridTracker::close_window(std::vector<TrackUpdate>& updates) {
  const Timestamp t_start = state_.window_start;
  const Timestamp t_end = t_start + frame_interval_;
  state_.window_open = false;
  ++state_.stats.frames_built;

  const auto frame = denoise_frame(build_frame(state_.window_events, geometry_, t_start, t_end));
  state_.window_events.clear();
  const auto slices = encode_frame(frame);
  auto components = merge_slices_to_rps(slices, rpu_);
  state_.stats.dropped_components += components.dropped;

  auto fresh = filter_valid_rps(components.proposals, rpu_);
  const int first_new_id = state_.next_id;
  for (auto& rp : fresh) {
    rp.id = state_.next_id++;
    rp.th = adapt_threshold(rp.active_pixels, 0.0, fotu_.config(), rpu_);
    rp.last_update_t = t_end;
    rp.last_match_t = t_end;
  }

  std::vector<RegionProposal> combined = state_.proposals;
  combined.insert(combined.end(), fresh.begin(), fresh.end());
  auto merged = merge_rps(combined, rpu_.margin);
  if (merged.size() > rpu_.max_proposals) {
    state_.stats.dropped_components += merged.size() - rpu_.max_proposals;
    merged.resize(rpu_.max_proposals);  // ascending id: live tracks win over new ones
  }

  auto survives = [&](int id) {
    return std::any_of(merged.begin(), merged.end(), [id](const auto& rp) { return rp.id == id; });
  };
  for (const auto& old : state_.proposals) {
    if (survives(old.id)) continue;
    const auto owner = std::find_if(merged.begin(), merged.end(), [&](const auto& rp) {
      return rp.bbox.dilated(rpu_.margin).intersects(old.bbox.dilated(rpu_.margin));
    });
    updates.push_back({TrackUpdateKind::Merged, t_end, old, owner == merged.end() ? -1 : owner->id});
    fotu_.release(old.id);
  }
  for (const auto& rp : merged) {
    if (rp.id >= first_new_id) {
      ++state_.stats.tracks_created;
      updates.push_back({TrackUpdateKind::Created, t_end, rp, -1});
    }
    state_.results.push_back({t_end, rp.id, rp.bbox, TrackMode::Frame});
  }
  state_.proposals = std::move(merged);
}

void HybridTracker::retire_idle(Timestamp now, std::vector<TrackUpdate>& updates) {
  const Timestamp limit = rpu_.retire_after_us();
  auto& rps = state_.proposals;
  for (auto it = rps.begin(); it != rps.end();) {
    if (it->mode == TrackMode::Event && now >= it->last_match_t && now - it->last_match_t >= limit) {
      updates.push_back({TrackUpdateKind::Retired, now, *it, -1});
      fotu_.release(it->id);
      ++state_.stats.tracks_retired;
      it = rps.erase(it);
    } else {
      ++it;
    }
  }
}

}  // namespace antiuav
