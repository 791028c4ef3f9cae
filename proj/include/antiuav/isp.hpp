#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "antiuav/box.hpp"
#include "antiuav/event_io.hpp"
#include "antiuav/fotu.hpp"
#include "antiuav/image_io.hpp"

namespace antiuav {

struct GrayFrame {
  SensorGeometry geometry;
  Timestamp t = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * static_cast<std::size_t>(geometry.width) + static_cast<std::size_t>(x)];
  }
  bool valid() const { return geometry.valid() && pixels.size() == geometry.pixel_count(); }
};

GrayFrame gray_frame_from_image(const GrayImage& image, Timestamp t);

enum class InputKind { Patch, TrajectoryRaster };

const char* to_string(InputKind kind);

inline constexpr int kClassifierSide = 32;

struct ClassifierInput {
  InputKind kind = InputKind::Patch;
  int object_id = 0;
  std::array<std::uint8_t, kClassifierSide * kClassifierSide> pixels{};

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y * kClassifierSide + x)]; }
  std::size_t nonzero() const;
  GrayImage to_image() const;

  bool operator==(const ClassifierInput&) const = default;
};

inline constexpr double kDefaultPadRatio = 0.25;

// Crops the bbox grown by pad_ratio of its size on every side, clamps to the
// frame, resamples to 32x32 by nearest neighbour and stretches to 0..255
// (constant patches become all zero). Throws EmptyBox.
ClassifierInput extract_patch(const GrayFrame& frame, const Box& bbox, double pad_ratio = kDefaultPadRatio,
                              int object_id = 0);

// Fits the bounding square of the points into out_size x out_size (aspect kept,
// centred) and draws the polyline; segment k of n gets intensity
// 64 + 191 * k / (n - 1), a single segment gets 255. Throws TooFewPoints.
GrayImage rasterize_points(std::span<const TrajectoryPoint> points, int out_size);

ClassifierInput rasterize_trajectory(const Trajectory& trajectory);

// Integer line from (x0, y0) to (x1, y1): one pixel per step along the major
// axis, minor coordinate rounded half away from zero.
template <typename Plot>
void draw_line(int x0, int y0, int x1, int y1, Plot&& plot) {
  const int dx = x1 - x0;
  const int dy = y1 - y0;
  const int steps = std::max(dx < 0 ? -dx : dx, dy < 0 ? -dy : dy);
  if (steps == 0) {
    plot(x0, y0);
    return;
  }
  auto div_round = [steps](long long num) {
    const long long den = 2LL * steps;
    return num >= 0 ? (2 * num + steps) / den : -((-2 * num + steps) / den);
  };
  for (int i = 0; i <= steps; ++i) {
    plot(x0 + static_cast<int>(div_round(static_cast<long long>(dx) * i)),
         y0 + static_cast<int>(div_round(static_cast<long long>(dy) * i)));
  }
}

}  // namespace antiuav
