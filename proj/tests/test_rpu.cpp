#include <random>

#include "antiuav/error.hpp"
#include "antiuav/rle.hpp"
#include "antiuav/rpu.hpp"
#include "antiuav/tracker.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace antiuav;

namespace {

std::vector<oracle::Component> components_of(const std::vector<RegionProposal>& rps) {
  std::vector<oracle::Component> out;
  for (const auto& rp : rps) out.push_back({rp.bbox, rp.active_pixels});
  std::sort(out.begin(), out.end());
  return out;
}

RegionProposal event_rp(int id, Box b, int th = 5) {
  RegionProposal rp;
  rp.id = id;
  rp.bbox = b;
  rp.mode = TrackMode::Event;
  rp.th = th;
  return rp;
}

// Fixpoint of "union every connected component of the dilated-overlap graph".
std::vector<std::pair<int, Box>> merge_oracle(std::vector<std::pair<int, Box>> boxes, int margin) {
  while (true) {
    const std::size_t n = boxes.size();
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      std::vector<std::size_t> stack{s};
      comp[s] = next;
      while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < n; ++j) {
          if (comp[j] < 0 && boxes[i].second.dilated(margin).intersects(boxes[j].second.dilated(margin))) {
            comp[j] = next;
            stack.push_back(j);
          }
        }
      }
      ++next;
    }
    if (static_cast<std::size_t>(next) == n) break;
    std::vector<std::pair<int, Box>> merged(static_cast<std::size_t>(next), {INT32_MAX, Box{}});
    std::vector<bool> seen(static_cast<std::size_t>(next), false);
    for (std::size_t i = 0; i < n; ++i) {
      auto& m = merged[static_cast<std::size_t>(comp[i])];
      if (!seen[static_cast<std::size_t>(comp[i])]) {
        m.second = boxes[i].second;
        seen[static_cast<std::size_t>(comp[i])] = true;
      }
      m.first = std::min(m.first, boxes[i].first);
      m.second = m.second.united(boxes[i].second);
    }
    boxes = merged;
  }
  std::sort(boxes.begin(), boxes.end(), [](auto& a, auto& b) { return a.first < b.first; });
  return boxes;
}

}  // namespace

TEST_CASE("slice merging examples") {
  const RpuConfig cfg;
  const std::vector<Slice> touching{{3, 2, 4}, {4, 3, 6}};
  const auto one = merge_slices_to_rps(touching, cfg).proposals;
  REQUIRE(one.size() == 1);
  CHECK(one[0].bbox == Box{2, 3, 6, 4});
  CHECK(one[0].active_pixels == 7);
  CHECK(one[0].mode == TrackMode::Frame);

  const std::vector<Slice> gap{{3, 2, 4}, {5, 2, 4}};
  CHECK(merge_slices_to_rps(gap, cfg).proposals.size() == 2);

  const std::vector<Slice> diagonal{{0, 0, 1}, {1, 2, 3}};
  CHECK(merge_slices_to_rps(diagonal, cfg).proposals.size() == 1);
  const std::vector<Slice> apart{{0, 0, 1}, {1, 3, 4}};
  CHECK(merge_slices_to_rps(apart, cfg).proposals.size() == 2);
}

TEST_CASE("U shape joins through a later row") {
  const RpuConfig cfg;
  const std::vector<Slice> u{{0, 0, 0}, {0, 4, 4}, {1, 0, 0}, {1, 4, 4}, {2, 0, 4}};
  const auto rps = merge_slices_to_rps(u, cfg).proposals;
  REQUIRE(rps.size() == 1);
  CHECK(rps[0].bbox == Box{0, 0, 4, 2});
  CHECK(rps[0].active_pixels == 9);
}

TEST_CASE("slice merging equals flood fill on random 64x64 frames") {
  std::mt19937_64 rng(23);
  RpuConfig cfg;
  cfg.max_proposals = 100000;
  for (int trial = 0; trial < 500; ++trial) {
    BinaryEventFrame f({64, 64}, 0, 10);
    std::bernoulli_distribution bit(0.05 + 0.05 * (trial % 10));
    for (int y = 0; y < 64; ++y)
      for (int x = 0; x < 64; ++x) f.set(x, y, bit(rng));
    const auto rps = merge_slices_to_rps(encode_frame(f), cfg).proposals;
    REQUIRE(components_of(rps) == oracle::flood_fill(f));
  }
}

TEST_CASE("capacity keeps the largest components") {
  RpuConfig cfg;
  cfg.max_proposals = 2;
  const std::vector<Slice> s{{0, 0, 0}, {0, 10, 14}, {0, 20, 22}, {5, 0, 1}};
  const auto r = merge_slices_to_rps(s, cfg);
  CHECK(r.dropped == 2);
  REQUIRE(r.proposals.size() == 2);
  CHECK(r.proposals[0].active_pixels == 5);
  CHECK(r.proposals[1].active_pixels == 3);
  CHECK(r.proposals[0].id == 0);
  CHECK(r.proposals[1].id == 1);
}

TEST_CASE("validity threshold") {
  const RpuConfig cfg;
  RegionProposal nine, ten;
  nine.active_pixels = 9;
  ten.active_pixels = 10;
  CHECK(filter_valid_rps(std::vector{nine}, cfg).empty());
  const auto kept = filter_valid_rps(std::vector{ten}, cfg);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].mode == TrackMode::Event);
  CHECK(filter_valid_rps(std::vector<RegionProposal>{}, cfg).empty());
}

TEST_CASE("match_event window") {
  RpuConfig cfg;
  cfg.margin = 2;
  auto rp = event_rp(0, {10, 10, 14, 14});
  CHECK(match_event(rp, {1, 16, 12, true}, cfg) == MatchResult::Matched);
  CHECK(match_event(rp, {2, 17, 12, true}, cfg) == MatchResult::NotMatched);
  CHECK(rp.match_count == 1);
  CHECK(rp.bbox == Box{10, 10, 14, 14});

  auto frame_rp = rp;
  frame_rp.mode = TrackMode::Frame;
  CHECK(match_event(frame_rp, {3, 12, 12, true}, cfg) == MatchResult::NotMatched);
}

TEST_CASE("k < TH matches leave the box alone") {
  const RpuConfig cfg;
  auto rp = event_rp(0, {10, 10, 14, 14}, 8);
  for (int k = 0; k < 7; ++k) {
    REQUIRE(match_event(rp, {static_cast<Timestamp>(k), 11 + k % 5, 12, true}, cfg) == MatchResult::Matched);
    CHECK(rp.bbox == Box{10, 10, 14, 14});
    CHECK(rp.match_count == k + 1);
  }
  try {
    commit_rp_update(rp, 100, cfg);
    FAIL("premature commit accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PrematureCommit);
  }
}

TEST_CASE("commit takes the extent of the matched events") {
  const RpuConfig cfg;
  auto rp = event_rp(0, {10, 10, 14, 14}, 5);
  for (int i = 0; i < 5; ++i) match_event(rp, {static_cast<Timestamp>(i), 11 + i, 11 + i, true}, cfg);
  const auto next = commit_rp_update(rp, 10, cfg);
  CHECK(next.bbox == Box{11, 11, 15, 15});
  CHECK(next.match_count == 0);
  CHECK_FALSE(next.matched_extent.has_value());
  CHECK(next.last_update_t == 10);
}

TEST_CASE("velocity from bbox centres at 10 ms commits") {
  const RpuConfig cfg;
  auto rp = event_rp(0, {100, 50, 104, 54}, 4);
  for (int step = 0; step < 30; ++step) {
    const Timestamp t = 10'000 * static_cast<Timestamp>(step + 1);
    const int x0 = 100 + step + 1;
    for (int i = 0; i < 4; ++i) match_event(rp, {t, i % 2 ? x0 : x0 + 4, i < 2 ? 50 : 54, true}, cfg);
    rp = commit_rp_update(rp, t, cfg);
  }
  REQUIRE(rp.has_velocity);
  CHECK(rp.vx == doctest::Approx(100.0).epsilon(1e-9));
  CHECK(rp.vy == doctest::Approx(0.0));
}

TEST_CASE("merge_rps examples") {
  const std::vector far{event_rp(0, {0, 0, 3, 3}), event_rp(1, {100, 100, 103, 103})};
  CHECK(merge_rps(far, 4) == far);
  auto a = event_rp(3, {10, 10, 14, 14});
  auto b = event_rp(1, {13, 13, 20, 20});
  a.active_pixels = 4;
  b.active_pixels = 6;
  const auto m = merge_rps(std::vector{a, b}, 0);
  REQUIRE(m.size() == 1);
  CHECK(m[0].bbox == Box{10, 10, 20, 20});
  CHECK(m[0].id == 1);
  CHECK(m[0].active_pixels == 10);
}

TEST_CASE("merge_rps reaches the component fixpoint") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    const int margin = static_cast<int>(rng() % 5);
    std::vector<RegionProposal> rps;
    std::vector<std::pair<int, Box>> boxes;
    const int n = 1 + static_cast<int>(rng() % 14);
    for (int i = 0; i < n; ++i) {
      const int x = static_cast<int>(rng() % 120), y = static_cast<int>(rng() % 120);
      const Box b{x, y, x + static_cast<int>(rng() % 12), y + static_cast<int>(rng() % 12)};
      auto rp = event_rp(static_cast<int>(rng() % 1000) * 100 + i, b);
      rp.active_pixels = 1;
      rps.push_back(rp);
      boxes.emplace_back(rp.id, b);
    }
    const auto got = merge_rps(rps, margin);
    const auto want = merge_oracle(boxes, margin);
    REQUIRE(got.size() == want.size());
    int total = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].id == want[i].first);
      CHECK(got[i].bbox == want[i].second);
      total += got[i].active_pixels;
    }
    CHECK(total == n);
  }
}

TEST_CASE("mode scheduler") {
  const RpuConfig cfg;
  CHECK(mode_scheduler({false, 0}, 0, cfg) == SchedulerAction::BuildFrame);
  CHECK(mode_scheduler({true, 0}, 5'100'000, cfg) == SchedulerAction::BuildFrame);
  CHECK(mode_scheduler({true, 0}, 4'900'000, cfg) == SchedulerAction::StayEventMode);
  RpuConfig off = cfg;
  off.periodic_rescan = false;
  CHECK(mode_scheduler({true, 0}, 100'000'000, off) == SchedulerAction::StayEventMode);
}

TEST_CASE("rescan period bounds") {
  RpuConfig cfg;
  cfg.rescan_period_s = 4.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.rescan_period_s = 31.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg.rescan_period_s = 30.0;
  CHECK_NOTHROW(cfg.validate());
}

namespace {

SyntheticScene moving(double speed, int size, double duration, std::uint64_t seed, double dir = 20.0) {
  MotionSpec m;
  m.speed = speed;
  m.object_size = size;
  m.duration_s = duration;
  m.direction_deg = dir;
  m.seed = seed;
  return generate_linear_motion(m);
}

HybridTracker run(const std::vector<Event>& events, RpuConfig rpu = {}, FotuConfig fotu = {}) {
  HybridTracker tr(SensorGeometry{}, kDefaultFrameInterval, rpu, fotu);
  std::vector<TrackUpdate> u;
  for (const auto& e : events) tr.process(e, u);
  tr.finish(u);
  return tr;
}

}  // namespace

TEST_CASE("tracker is deterministic") {
  const auto s = moving(80, 6, 1.0, 4);
  CHECK(run(s.events) == run(s.events));
}

TEST_CASE("commit box is the extent of the TH matched events") {
  RpuConfig rpu;
  const auto s = moving(60, 7, 1.0, 8);
  HybridTracker tr(SensorGeometry{}, kDefaultFrameInterval, rpu, FotuConfig{});
  std::vector<TrackUpdate> u;
  std::optional<Box> extent;
  int matched = 0;
  std::size_t commits = 0;
  for (const auto& e : s.events) {
    const auto before = tr.state().proposals;
    const bool single = before.size() == 1 && before[0].mode == TrackMode::Event;
    const bool inside = single && before[0].bbox.dilated(rpu.margin).contains(e.x, e.y);
    const int th = single ? before[0].th : 0;
    u.clear();
    tr.process(e, u);
    if (!single) {
      // The event that closes the promoting frame window is matched right away.
      const auto& now = tr.state().proposals;
      if (now.size() == 1 && now[0].mode == TrackMode::Event && now[0].match_count == 1) {
        extent = Box::point(e.x, e.y);
        matched = 1;
      }
      continue;
    }
    if (inside) {
      extent = extent ? extent->united(Box::point(e.x, e.y)) : Box::point(e.x, e.y);
      ++matched;
    }
    for (const auto& up : u) {
      if (up.kind != TrackUpdateKind::Commit) continue;
      ++commits;
      REQUIRE(extent.has_value());
      CHECK(up.rp.bbox == *extent);
      CHECK(matched == th);
      extent.reset();
      matched = 0;
    }
    if (!inside) {
      // Events outside the window never touch the proposal.
      REQUIRE(tr.state().proposals.size() == 1);
      CHECK(tr.state().proposals[0].bbox == before[0].bbox);
      CHECK(tr.state().proposals[0].match_count == before[0].match_count);
    }
  }
  CHECK(commits > 50);
}

TEST_CASE("tracker emits rows for commits and frame passes") {
  const auto s = moving(40, 6, 0.5, 2);
  const auto tr = run(s.events);
  const auto& st = tr.state();
  std::size_t event_rows = 0;
  for (const auto& r : st.results) event_rows += r.mode == TrackMode::Event;
  CHECK(event_rows == st.stats.commits);
  CHECK(st.stats.tracks_created == 1);
  CHECK(parse_track_rows(serialize_track_rows(st.results)) == st.results);
}

TEST_CASE("re-scan merges into the live track") {
  RpuConfig rpu;
  rpu.rescan_period_s = 5.0;
  const auto s = moving(3, 6, 12.0, 6);
  const auto tr = run(s.events, rpu);
  CHECK(tr.state().stats.frames_built >= 3);
  CHECK(tr.state().stats.tracks_created == 1);
  REQUIRE(tr.state().proposals.size() == 1);
  CHECK(tr.state().proposals[0].id == 0);
}

TEST_CASE("idle tracks retire after two re-scan periods") {
  RpuConfig rpu;
  auto s = moving(0, 6, 0.5, 3);
  // A lone event far away, 10.5 s later.
  s.events.push_back({10'500'000, 5, 5, true});
  const auto tr = run(s.events, rpu);
  CHECK(tr.state().stats.tracks_retired == 1);
  CHECK(tr.state().proposals.empty());
}

TEST_CASE("tracker rejects out-of-order events") {
  HybridTracker tr(SensorGeometry{}, kDefaultFrameInterval, RpuConfig{}, FotuConfig{});
  std::vector<TrackUpdate> u;
  tr.process({100, 1, 1, true}, u);
  CHECK_THROWS_AS(tr.process({99, 1, 1, true}, u), Error);
  CHECK_THROWS_AS(tr.process({200, 400, 1, true}, u), Error);
}

TEST_CASE("two objects crossing paths fuse into the lower id") {
  MotionSpec a, b;
  a.speed = 60;
  a.direction_deg = 0;
  a.start_x = 100;
  a.start_y = 100;
  a.duration_s = 1.0;
  a.seed = 1;
  b = a;
  b.direction_deg = 180;
  b.start_x = 200;
  b.object_id = 1;
  b.seed = 2;
  const auto scene = merge_scenes(std::vector{generate_linear_motion(a), generate_linear_motion(b)});
  HybridTracker tr(SensorGeometry{}, kDefaultFrameInterval, RpuConfig{}, FotuConfig{});
  std::vector<TrackUpdate> u;
  for (const auto& e : scene.events) tr.process(e, u);
  tr.finish(u);
  bool merged = false;
  for (const auto& up : u) {
    if (up.kind == TrackUpdateKind::Merged) {
      merged = true;
      CHECK(up.absorbed_by < up.rp.id);
    }
  }
  CHECK(merged);
}
