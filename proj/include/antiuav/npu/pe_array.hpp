#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace antiuav::npu {

// Unsigned 8-bit activations, CHW.
struct Tensor {
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<std::uint8_t> data;

  Tensor() = default;
  Tensor(int channels, int height, int width)
      : c(channels), h(height), w(width), data(static_cast<std::size_t>(channels) * height * width, 0) {}

  std::size_t size() const { return data.size(); }
  std::uint8_t at(int ch, int y, int x) const { return data[index(ch, y, x)]; }
  std::uint8_t& at(int ch, int y, int x) { return data[index(ch, y, x)]; }
  bool operator==(const Tensor&) const = default;

 private:
  std::size_t index(int ch, int y, int x) const {
    return (static_cast<std::size_t>(ch) * h + static_cast<std::size_t>(y)) * w + static_cast<std::size_t>(x);
  }
};

struct ConvShape {
  int in_c = 0;
  int in_h = 0;
  int in_w = 0;
  int out_c = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;

  int out_h() const { return (in_h + 2 * pad - kernel) / stride + 1; }
  int out_w() const { return (in_w + 2 * pad - kernel) / stride + 1; }
  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_c) * in_c * kernel * kernel;
  }
  bool operator==(const ConvShape&) const = default;
};

// MAC accounting. A wave is one reduction step across a 16x16 tile; it is
// skipped when every PE of the tile has a zero operand at that step.
struct MacReport {
  std::uint64_t dense = 0;
  std::uint64_t executed = 0;
  std::uint64_t skipped = 0;
  std::uint64_t waves = 0;
  std::uint64_t dense_waves = 0;

  MacReport& operator+=(const MacReport& o);
  bool operator==(const MacReport&) const = default;
};

// Output-stationary 16x16 array: PE (r, c) owns one output value from clear()
// until drain(). Zero-operand MACs are skipped and counted per PE.
class PeArray {
 public:
  static constexpr int kRows = 16;
  static constexpr int kCols = 16;

  void clear();
  // Returns true if the MAC was executed (both operands nonzero).
  bool mac(int row, int col, std::uint8_t activation, std::int8_t weight);
  std::int32_t drain(int row, int col);

  std::uint64_t skipped(int row, int col) const { return skipped_[slot(row, col)]; }
  std::uint64_t executed(int row, int col) const { return executed_[slot(row, col)]; }

 private:
  static std::size_t slot(int row, int col) { return static_cast<std::size_t>(row * kCols + col); }

  std::array<std::int32_t, kRows * kCols> acc_{};
  std::array<bool, kRows * kCols> drained_{};
  std::array<std::uint64_t, kRows * kCols> skipped_{};
  std::array<std::uint64_t, kRows * kCols> executed_{};
};

struct ConvResult {
  int out_c = 0;
  int out_h = 0;
  int out_w = 0;
  std::vector<std::int32_t> acc;  // CHW, bias included
  MacReport macs;

  std::int32_t at(int ch, int y, int x) const {
    return acc[(static_cast<std::size_t>(ch) * out_h + static_cast<std::size_t>(y)) * out_w + static_cast<std::size_t>(x)];
  }
};

// Weights are [out_c][in_c][k][k] int8, bias int32 per output channel. Output
// pixels map onto PE rows and output channels onto PE columns, 16 x 16 per
// tile. Throws ShapeMismatch.
ConvResult conv2d_output_stationary(const Tensor& activations, std::span<const std::int8_t> weights,
                                    std::span<const std::int32_t> bias, const ConvShape& shape);

// round(acc * scale) saturated to 0..255.
std::uint8_t requantize(std::int32_t acc, float scale);

Tensor max_pool(const Tensor& input, int size, int stride);

}  // namespace antiuav::npu
