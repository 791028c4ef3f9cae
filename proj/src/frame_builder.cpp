#include "antiuav/frame_builder.hpp"

#include <algorithm>
#include <string>

#include "antiuav/error.hpp"

namespace antiuav {

BinaryEventFrame::BinaryEventFrame(SensorGeometry geometry, Timestamp t_start, Timestamp t_end)
    : geometry_(geometry), t_start_(t_start), t_end_(t_end), bits_(geometry.pixel_count(), 0) {
  if (!geometry.valid()) throw Error(ErrorCode::InvalidConfig, "sensor geometry must be at least 1x1");
  if (t_start >= t_end) throw Error(ErrorCode::InvalidConfig, "frame window must satisfy t_start < t_end");
}

std::size_t BinaryEventFrame::popcount() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

BinaryEventFrame build_frame(std::span<const Event> events, const SensorGeometry& geometry,
                             Timestamp t_start, Timestamp t_end) {
  BinaryEventFrame frame(geometry, t_start, t_end);
  for (std::size_t i = 0; i < events.size(); ++i) {
    const auto& e = events[i];
    if (e.t < t_start || e.t >= t_end) {
      throw Error(ErrorCode::OutOfBounds, "event timestamp " + std::to_string(e.t) + " outside frame window", i);
    }
    if (!geometry.contains(e.x, e.y)) throw Error(ErrorCode::OutOfBounds, "event outside geometry", i);
    frame.set(e.x, e.y);
  }
  return frame;
}

BinaryEventFrame denoise_frame(const BinaryEventFrame& frame) {
  BinaryEventFrame out(frame.geometry(), frame.t_start(), frame.t_end());
  const int w = frame.width();
  const int h = frame.height();
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - 1);
    const int y1 = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      if (!frame.get(x, y)) continue;
      const int x0 = std::max(0, x - 1);
      const int x1 = std::min(w - 1, x + 1);
      bool supported = false;
      for (int ny = y0; ny <= y1 && !supported; ++ny) {
        for (int nx = x0; nx <= x1; ++nx) {
          if ((nx != x || ny != y) && frame.get(nx, ny)) {
            supported = true;
            break;
          }
        }
      }
      if (supported) out.set(x, y);
    }
  }
  return out;
}

}  // namespace antiuav
