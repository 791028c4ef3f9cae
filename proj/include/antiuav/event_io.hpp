#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "antiuav/box.hpp"

namespace antiuav {

using Timestamp = std::uint64_t;  // microseconds

inline constexpr Timestamp kMicrosPerSecond = 1'000'000;

struct SensorGeometry {
  int width = 346;
  int height = 260;

  constexpr bool valid() const { return width >= 1 && height >= 1; }
  constexpr bool contains(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }
  constexpr bool contains(const Box& b) const {
    return b.valid() && contains(b.x_min, b.y_min) && contains(b.x_max, b.y_max);
  }
  constexpr std::size_t pixel_count() const {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  constexpr bool operator==(const SensorGeometry&) const = default;
};

struct Event {
  Timestamp t = 0;
  int x = 0;
  int y = 0;
  bool polarity = false;

  constexpr bool operator==(const Event&) const = default;
};

struct GroundTruthBox {
  Timestamp t = 0;
  int object_id = 0;
  Box bbox;
  std::string label;

  bool operator==(const GroundTruthBox&) const = default;
};

// `t,x,y,p` CSV. A non-numeric first line is treated as a header.
std::vector<Event> parse_events(std::string_view text, const SensorGeometry& geometry);
std::vector<Event> read_events_file(const std::string& path, const SensorGeometry& geometry);
std::string serialize_events(std::span<const Event> events, bool with_header = false);
void write_events_file(const std::string& path, std::span<const Event> events);

// `t,object_id,x_min,y_min,x_max,y_max,label` CSV.
std::vector<GroundTruthBox> parse_ground_truth(std::string_view text, const SensorGeometry& geometry);
std::vector<GroundTruthBox> read_ground_truth_file(const std::string& path,
                                                   const SensorGeometry& geometry);
std::string serialize_ground_truth(std::span<const GroundTruthBox> boxes, bool with_header = true);
void write_ground_truth_file(const std::string& path, std::span<const GroundTruthBox> boxes);

// Square object translating at constant velocity. The box at time t is the
// start box shifted by round(velocity * (t - t0)).
struct LinearMotion {
  int object_id = 0;
  Timestamp t0 = 0;
  int size = 5;                 // side length in pixels
  double start_x = 0.0;         // x_min at t0
  double start_y = 0.0;         // y_min at t0
  double velocity_x = 0.0;      // px/s
  double velocity_y = 0.0;      // px/s

  Box box_at(Timestamp t) const;
};

struct MotionSpec {
  SensorGeometry geometry;
  int object_size = 5;          // side length in pixels
  double speed = 0.0;           // px/s
  double direction_deg = 0.0;   // 0 = +x, 90 = +y
  std::optional<double> start_x;  // defaults center the path in the frame
  std::optional<double> start_y;
  double duration_s = 1.0;
  double event_rate = 1.0;      // object events per object pixel per frame interval
  double noise_fraction = 0.05; // share of all emitted events that are uniform background noise
  Timestamp frame_interval_us = 10'000;
  Timestamp t_offset = 0;
  int object_id = 0;
  std::string label = "uav";
  std::uint64_t seed = 0;
};

struct SyntheticScene {
  std::vector<Event> events;
  std::vector<GroundTruthBox> truth;
  std::vector<LinearMotion> motions;
};

SyntheticScene generate_linear_motion(const MotionSpec& spec);

// Interleaves several scenes by timestamp (stable, so per-scene order is kept).
SyntheticScene merge_scenes(std::span<const SyntheticScene> scenes);

}  // namespace antiuav
