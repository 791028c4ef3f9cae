#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "antiuav/frame_builder.hpp"

namespace antiuav {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const GrayImage&) const = default;
};

// Binary PBM (P4). Reading also accepts ASCII P1.
std::string encode_pbm(const BinaryEventFrame& frame);
BinaryEventFrame decode_pbm(std::string_view data, Timestamp t_start = 0,
                            Timestamp t_end = kDefaultFrameInterval);

// Binary PGM (P5, maxval 255). Reading also accepts ASCII P2.
std::string encode_pgm(const GrayImage& image);
GrayImage decode_pgm(std::string_view data);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

}  // namespace antiuav
