#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "antiuav/event_io.hpp"

namespace antiuav {

inline constexpr Timestamp kDefaultFrameInterval = 10'000;

// Per-window binary event image. One byte per pixel in memory, 0 or 1.
class BinaryEventFrame {
 public:
  BinaryEventFrame() = default;
  BinaryEventFrame(SensorGeometry geometry, Timestamp t_start, Timestamp t_end);

  const SensorGeometry& geometry() const { return geometry_; }
  int width() const { return geometry_.width; }
  int height() const { return geometry_.height; }
  Timestamp t_start() const { return t_start_; }
  Timestamp t_end() const { return t_end_; }

  bool get(int x, int y) const { return bits_[index(x, y)] != 0; }
  void set(int x, int y, bool value = true) { bits_[index(x, y)] = value ? 1 : 0; }

  std::size_t popcount() const;
  std::span<const std::uint8_t> row(int y) const {
    return {bits_.data() + static_cast<std::size_t>(y) * geometry_.width,
            static_cast<std::size_t>(geometry_.width)};
  }

  bool operator==(const BinaryEventFrame&) const = default;

 private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(geometry_.width) +
           static_cast<std::size_t>(x);
  }

  SensorGeometry geometry_;
  Timestamp t_start_ = 0;
  Timestamp t_end_ = 1;
  std::vector<std::uint8_t> bits_;
};

// Both polarities set the bit. Events must lie in [t_start, t_end).
BinaryEventFrame build_frame(std::span<const Event> events, const SensorGeometry& geometry,
                             Timestamp t_start, Timestamp t_end);

// Keeps a pixel iff at least one of its 8 neighbours is set in the input frame.
BinaryEventFrame denoise_frame(const BinaryEventFrame& frame);

}  // namespace antiuav
