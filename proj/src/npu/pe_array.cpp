#include "antiuav/npu/pe_array.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "antiuav/error.hpp"

namespace antiuav::npu {

MacReport& MacReport::operator+=(const MacReport& o) {
  dense += o.dense;
  executed += o.executed;
  skipped += o.skipped;
  waves += o.waves;
  dense_waves += o.dense_waves;
  return *this;
}

void PeArray::clear() {
  acc_.fill(0);
  drained_.fill(false);
}

bool PeArray::mac(int row, int col, std::uint8_t activation, std::int8_t weight) {
  const auto s = slot(row, col);
  if (drained_[s]) throw std::logic_error("MAC into a drained PE before clear()");
  if (activation == 0 || weight == 0) {
    ++skipped_[s];
    return false;
  }
  acc_[s] += static_cast<std::int32_t>(activation) * static_cast<std::int32_t>(weight);
  ++executed_[s];
  return true;
}

std::int32_t PeArray::drain(int row, int col) {
  const auto s = slot(row, col);
  drained_[s] = true;
  return acc_[s];
}

ConvResult conv2d_output_stationary(const Tensor& activations, std::span<const std::int8_t> weights,
                                    std::span<const std::int32_t> bias, const ConvShape& shape) {
  if (shape.in_c < 1 || shape.out_c < 1 || shape.kernel < 1 || shape.stride < 1 || shape.pad < 0) {
    throw Error(ErrorCode::ShapeMismatch, "conv shape parameters must be positive");
  }
  if (activations.c != shape.in_c || activations.h != shape.in_h || activations.w != shape.in_w ||
      activations.size() != static_cast<std::size_t>(shape.in_c) * shape.in_h * shape.in_w) {
    throw Error(ErrorCode::ShapeMismatch, "activation tensor does not match layer input shape");
  }
  if (weights.size() != shape.weight_count()) throw Error(ErrorCode::ShapeMismatch, "weight count mismatch");
  if (bias.size() != static_cast<std::size_t>(shape.out_c)) throw Error(ErrorCode::ShapeMismatch, "bias count mismatch");
  if (shape.in_h + 2 * shape.pad < shape.kernel || shape.in_w + 2 * shape.pad < shape.kernel) {
    throw Error(ErrorCode::ShapeMismatch, "kernel larger than padded input");
  }

  ConvResult result;
  result.out_c = shape.out_c;
  result.out_h = shape.out_h();
  result.out_w = shape.out_w();
  const int pixels = result.out_h * result.out_w;
  result.acc.assign(static_cast<std::size_t>(shape.out_c) * pixels, 0);

  const int k = shape.kernel;
  const int reduction = shape.in_c * k * k;
  PeArray pe;
  std::array<std::uint8_t, PeArray::kRows> act{};
  for (int p0 = 0; p0 < pixels; p0 += PeArray::kRows) {
    const int rows = std::min(PeArray::kRows, pixels - p0);
    for (int c0 = 0; c0 < shape.out_c; c0 += PeArray::kCols) {
      const int cols = std::min(PeArray::kCols, shape.out_c - c0);
      pe.clear();
      for (int step = 0; step < reduction; ++step) {
        const int ic = step / (k * k);
        const int ky = (step / k) % k;
        const int kx = step % k;
        for (int r = 0; r < rows; ++r) {
          const int p = p0 + r;
          const int iy = (p / result.out_w) * shape.stride + ky - shape.pad;
          const int ix = (p % result.out_w) * shape.stride + kx - shape.pad;
          const bool inside = iy >= 0 && iy < shape.in_h && ix >= 0 && ix < shape.in_w;
          act[static_cast<std::size_t>(r)] = inside ? activations.at(ic, iy, ix) : 0;
        }
        bool wave = false;
        for (int c = 0; c < cols; ++c) {
          const auto w = weights[static_cast<std::size_t>(c0 + c) * reduction + static_cast<std::size_t>(step)];
          for (int r = 0; r < rows; ++r) {
            if (pe.mac(r, c, act[static_cast<std::size_t>(r)], w)) {
              wave = true;
              ++result.macs.executed;
            }
          }
        }
        result.macs.dense += static_cast<std::uint64_t>(rows) * cols;
        ++result.macs.dense_waves;
        if (wave) ++result.macs.waves;
      }
      for (int c = 0; c < cols; ++c) {
        for (int r = 0; r < rows; ++r) {
          result.acc[static_cast<std::size_t>(c0 + c) * pixels + static_cast<std::size_t>(p0 + r)] =
              pe.drain(r, c) + bias[static_cast<std::size_t>(c0 + c)];
        }
      }
    }
  }
  result.macs.skipped = result.macs.dense - result.macs.executed;
  return result;
}

std::uint8_t requantize(std::int32_t acc, float scale) {
  const auto v = std::llround(static_cast<double>(acc) * static_cast<double>(scale));
  return static_cast<std::uint8_t>(std::clamp<long long>(v, 0, 255));
}

Tensor max_pool(const Tensor& input, int size, int stride) {
  if (size < 1 || stride < 1 || input.h < size || input.w < size) {
    throw Error(ErrorCode::ShapeMismatch, "pool window does not fit the input");
  }
  Tensor out(input.c, (input.h - size) / stride + 1, (input.w - size) / stride + 1);
  for (int c = 0; c < out.c; ++c) {
    for (int y = 0; y < out.h; ++y) {
      for (int x = 0; x < out.w; ++x) {
        std::uint8_t m = 0;
        for (int dy = 0; dy < size; ++dy)
          for (int dx = 0; dx < size; ++dx) m = std::max(m, input.at(c, y * stride + dy, x * stride + dx));
        out.at(c, y, x) = m;
      }
    }
  }
  return out;
}

}  // namespace antiuav::npu
