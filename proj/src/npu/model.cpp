#include "antiuav/npu/model.hpp"

#include <bit>
#include <cstring>

#include "antiuav/error.hpp"
#include "antiuav/image_io.hpp"

namespace antiuav::npu {

static_assert(std::endian::native == std::endian::little, "blob I/O assumes a little-endian host");

std::vector<ConvShape> Model::layer_shapes() const {
  std::vector<ConvShape> shapes;
  int c = in_c, h = in_h, w = in_w;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& L = layers[i];
    const auto where = "layer " + std::to_string(i);
    if (L.out_c < 1 || L.in_c < 1 || L.kernel < 1 || L.stride < 1 || L.pad < 0 || L.pool < 0) {
      throw Error(ErrorCode::ModelShapeMismatch, where + ": non-positive dimension");
    }
    if (L.type == LayerType::Conv) {
      if (L.in_c != c) throw Error(ErrorCode::ModelShapeMismatch, where + ": expects " + std::to_string(L.in_c) + " channels, gets " + std::to_string(c));
      ConvShape s{c, h, w, L.out_c, L.kernel, L.stride, L.pad};
      if (h + 2 * L.pad < L.kernel || w + 2 * L.pad < L.kernel) throw Error(ErrorCode::ModelShapeMismatch, where + ": kernel exceeds input");
      shapes.push_back(s);
      c = L.out_c;
      h = s.out_h();
      w = s.out_w();
      if (L.pool > 0) {
        if (h < L.pool || w < L.pool) throw Error(ErrorCode::ModelShapeMismatch, where + ": pool exceeds feature map");
        h = (h - L.pool) / L.pool + 1;
        w = (w - L.pool) / L.pool + 1;
      }
    } else {
      const int flat = c * h * w;
      if (L.in_c != flat || L.kernel != 1 || L.pad != 0 || L.pool != 0) {
        throw Error(ErrorCode::ModelShapeMismatch, where + ": FC expects " + std::to_string(L.in_c) + " inputs, gets " + std::to_string(flat));
      }
      shapes.push_back({flat, 1, 1, L.out_c, 1, 1, 0});
      c = L.out_c;
      h = w = 1;
    }
    if (L.weights.size() != shapes.back().weight_count() || L.bias.size() != static_cast<std::size_t>(L.out_c)) {
      throw Error(ErrorCode::ModelShapeMismatch, where + ": tensor sizes do not match its shape");
    }
  }
  return shapes;
}

void Model::validate() const {
  if (in_c < 1 || in_h < 1 || in_w < 1) throw Error(ErrorCode::ModelShapeMismatch, "bad input shape");
  if (layers.empty()) throw Error(ErrorCode::ModelShapeMismatch, "model has no layers");
  layer_shapes();
  const auto& last = layers.back();
  if (last.type != LayerType::Fc || static_cast<std::size_t>(last.out_c) != classes.size()) {
    throw Error(ErrorCode::ModelShapeMismatch, "last layer must be FC with one output per class");
  }
  for (std::size_t i = 0; i + 1 < layers.size(); ++i) {
    if (layers[i].type == LayerType::Fc && layers[i + 1].type == LayerType::Conv) {
      throw Error(ErrorCode::ModelShapeMismatch, "conv layer after FC");
    }
  }
}

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) { raw(&v, 4); }
  void f32(float v) { raw(&v, 4); }
  void raw(const void* p, std::size_t n) { out_.append(static_cast<const char*>(p), n); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, 4);
    return v;
  }
  float f32() {
    float v;
    raw(&v, 4);
    return v;
  }
  void raw(void* p, std::size_t n) {
    if (pos_ + n > data_.size()) throw Error(ErrorCode::MalformedModel, "truncated weight blob");
    std::memcpy(p, data_.data() + pos_, n);
    pos_ += n;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_model(const Model& model) {
  model.validate();
  Writer w;
  w.raw("NPU1", 4);
  w.u32(static_cast<std::uint32_t>(model.layers.size()));
  w.u32(static_cast<std::uint32_t>(model.in_c));
  w.u32(static_cast<std::uint32_t>(model.in_h));
  w.u32(static_cast<std::uint32_t>(model.in_w));
  for (const auto& L : model.layers) {
    for (auto v : {static_cast<std::uint32_t>(L.type), static_cast<std::uint32_t>(L.out_c),
                   static_cast<std::uint32_t>(L.in_c), static_cast<std::uint32_t>(L.kernel),
                   static_cast<std::uint32_t>(L.stride), static_cast<std::uint32_t>(L.pad),
                   static_cast<std::uint32_t>(L.pool)}) {
      w.u32(v);
    }
    w.f32(L.scale);
    w.raw(L.weights.data(), L.weights.size());
    w.raw(L.bias.data(), L.bias.size() * sizeof(std::int32_t));
  }
  return w.take();
}

Model decode_model(std::string_view blob) {
  Reader r(blob);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, "NPU1", 4) != 0) throw Error(ErrorCode::MalformedModel, "bad magic");
  Model m;
  const auto count = r.u32();
  if (count > 256) throw Error(ErrorCode::MalformedModel, "implausible layer count");
  m.in_c = static_cast<int>(r.u32());
  m.in_h = static_cast<int>(r.u32());
  m.in_w = static_cast<int>(r.u32());
  for (std::uint32_t i = 0; i < count; ++i) {
    Layer L;
    const auto type = r.u32();
    if (type > 1) throw Error(ErrorCode::MalformedModel, "unknown layer type", i);
    L.type = static_cast<LayerType>(type);
    L.out_c = static_cast<int>(r.u32());
    L.in_c = static_cast<int>(r.u32());
    L.kernel = static_cast<int>(r.u32());
    L.stride = static_cast<int>(r.u32());
    L.pad = static_cast<int>(r.u32());
    L.pool = static_cast<int>(r.u32());
    L.scale = r.f32();
    const auto wcount = static_cast<std::size_t>(L.out_c) * L.in_c * L.kernel * L.kernel;
    if (wcount > (std::size_t{1} << 26)) throw Error(ErrorCode::MalformedModel, "implausible layer size", i);
    L.weights.resize(wcount);
    r.raw(L.weights.data(), wcount);
    L.bias.resize(static_cast<std::size_t>(L.out_c));
    r.raw(L.bias.data(), L.bias.size() * sizeof(std::int32_t));
    m.layers.push_back(std::move(L));
  }
  if (!r.done()) throw Error(ErrorCode::MalformedModel, "trailing bytes after last layer");
  m.validate();
  return m;
}

Model load_model(const std::string& path) { return decode_model(read_file(path)); }

void save_model(const std::string& path, const Model& model) { write_file(path, encode_model(model)); }

}  // namespace antiuav::npu
