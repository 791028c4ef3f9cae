#include "antiuav/rle.hpp"

#include <algorithm>

#include "antiuav/error.hpp"

namespace antiuav {

std::vector<Slice> encode_frame(const BinaryEventFrame& frame) {
  std::vector<Slice> slices;
  for (int y = 0; y < frame.height(); ++y) {
    const auto row = frame.row(y);
    const int w = frame.width();
    int x = 0;
    while (x < w) {
      if (!row[static_cast<std::size_t>(x)]) {
        ++x;
        continue;
      }
      const int start = x;
      while (x < w && row[static_cast<std::size_t>(x)]) ++x;
      slices.push_back({y, start, x - 1});
    }
  }
  return slices;
}

BinaryEventFrame decode_slices(std::span<const Slice> slices, const SensorGeometry& geometry,
                               Timestamp t_start, Timestamp t_end) {
  BinaryEventFrame frame(geometry, t_start, t_end);
  for (std::size_t i = 0; i < slices.size(); ++i) {
    const auto& s = slices[i];
    if (s.x_start > s.x_end || !geometry.contains(s.x_start, s.row) || !geometry.contains(s.x_end, s.row)) {
      throw Error(ErrorCode::OutOfBounds, "slice outside geometry", i);
    }
    for (int x = s.x_start; x <= s.x_end; ++x) {
      if (frame.get(x, s.row)) throw Error(ErrorCode::OverlappingSlices, "row " + std::to_string(s.row), i);
      frame.set(x, s.row);
    }
  }
  return frame;
}

}  // namespace antiuav
