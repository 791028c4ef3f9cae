#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "antiuav/npu/pe_array.hpp"

namespace antiuav::npu {

enum class LayerType : std::uint32_t { Conv = 0, Fc = 1 };

// One weighted layer. FC layers use kernel = 1 with in_c = flattened input
// length. `pool` is the size (and stride) of a max pool after the layer, 0 for
// none. Hidden layers requantize with `scale`; the final FC layer's `scale`
// converts its int32 logits back to real units.
struct Layer {
  LayerType type = LayerType::Conv;
  int out_c = 0;
  int in_c = 0;
  int kernel = 1;
  int stride = 1;
  int pad = 0;
  int pool = 0;
  float scale = 1.0f;
  std::vector<std::int8_t> weights;  // [out_c][in_c][kernel][kernel]
  std::vector<std::int32_t> bias;    // [out_c]

  std::size_t byte_size() const { return weights.size() + 4 * bias.size(); }
  bool operator==(const Layer&) const = default;
};

struct Model {
  int in_c = 1;
  int in_h = 32;
  int in_w = 32;
  std::vector<Layer> layers;
  std::vector<std::string> classes{"uav", "non_uav"};

  // Throws ModelShapeMismatch if shapes do not chain or the last layer is not
  // an FC layer with one output per class.
  void validate() const;
  // Input shape of each layer (for FC: in_c x 1 x 1 after flattening).
  std::vector<ConvShape> layer_shapes() const;

  bool operator==(const Model&) const = default;
};

// Little-endian blob: "NPU1", u32 layer count, u32 in_c/in_h/in_w, then per
// layer u32 type/out_c/in_c/kernel/stride/pad/pool, f32 scale, int8 weights,
// int32 bias.
std::string encode_model(const Model& model);
Model decode_model(std::string_view blob);
Model load_model(const std::string& path);
void save_model(const std::string& path, const Model& model);

}  // namespace antiuav::npu
