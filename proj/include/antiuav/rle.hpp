#pragma once

#include <span>
#include <vector>

#include "antiuav/frame_builder.hpp"

namespace antiuav {

// Maximal horizontal run of set pixels; x_end is inclusive.
struct Slice {
  int row = 0;
  int x_start = 0;
  int x_end = 0;

  constexpr int length() const { return x_end - x_start + 1; }
  constexpr bool operator==(const Slice&) const = default;
};

// Row-major, left to right.
std::vector<Slice> encode_frame(const BinaryEventFrame& frame);

// Inverse of encode_frame. Throws OverlappingSlices when two slices of one row
// intersect, OutOfBounds when a slice leaves the geometry.
BinaryEventFrame decode_slices(std::span<const Slice> slices, const SensorGeometry& geometry,
                               Timestamp t_start = 0, Timestamp t_end = kDefaultFrameInterval);

}  // namespace antiuav
