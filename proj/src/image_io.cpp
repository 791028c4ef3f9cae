#include "antiuav/image_io.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "antiuav/error.hpp"

namespace antiuav {

namespace {

// Netpbm header tokenizer; skips whitespace and '#' comments.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view data) : data_(data) {}

  std::string_view token() {
    skip();
    const auto start = pos_;
    while (pos_ < data_.size() && !std::isspace(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) throw Error(ErrorCode::Io, "truncated netpbm header");
    return data_.substr(start, pos_ - start);
  }

  int integer() {
    const auto t = token();
    int v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw Error(ErrorCode::Io, "bad netpbm integer");
    return v;
  }

  // Raster data begins after exactly one whitespace byte.
  std::string_view raster() {
    if (pos_ >= data_.size()) throw Error(ErrorCode::Io, "missing netpbm raster");
    return data_.substr(pos_ + 1);
  }

  // Digit-by-digit reading for P1, where bits need not be separated.
  int bit() {
    skip();
    if (pos_ >= data_.size() || (data_[pos_] != '0' && data_[pos_] != '1')) {
      throw Error(ErrorCode::Io, "bad P1 raster");
    }
    return data_[pos_++] - '0';
  }

 private:
  void skip() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_pbm(const BinaryEventFrame& frame) {
  std::string out = "P4\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n";
  const int row_bytes = (frame.width() + 7) / 8;
  for (int y = 0; y < frame.height(); ++y) {
    for (int b = 0; b < row_bytes; ++b) {
      unsigned char byte = 0;
      for (int bit = 0; bit < 8; ++bit) {
        const int x = b * 8 + bit;
        if (x < frame.width() && frame.get(x, y)) byte |= static_cast<unsigned char>(0x80u >> bit);
      }
      out.push_back(static_cast<char>(byte));
    }
  }
  return out;
}

BinaryEventFrame decode_pbm(std::string_view data, Timestamp t_start, Timestamp t_end) {
  HeaderReader reader(data);
  const auto magic = reader.token();
  if (magic != "P4" && magic != "P1") throw Error(ErrorCode::Io, "not a PBM file");
  SensorGeometry geo{reader.integer(), reader.integer()};
  BinaryEventFrame frame(geo, t_start, t_end);
  if (magic == "P1") {
    for (int y = 0; y < geo.height; ++y)
      for (int x = 0; x < geo.width; ++x) frame.set(x, y, reader.bit() == 1);
    return frame;
  }
  const auto raster = reader.raster();
  const auto row_bytes = static_cast<std::size_t>((geo.width + 7) / 8);
  if (raster.size() < row_bytes * static_cast<std::size_t>(geo.height)) throw Error(ErrorCode::Io, "truncated PBM raster");
  for (int y = 0; y < geo.height; ++y) {
    for (int x = 0; x < geo.width; ++x) {
      const auto byte = static_cast<unsigned char>(raster[static_cast<std::size_t>(y) * row_bytes + x / 8]);
      frame.set(x, y, (byte & (0x80u >> (x % 8))) != 0);
    }
  }
  return frame;
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

GrayImage decode_pgm(std::string_view data) {
  HeaderReader reader(data);
  const auto magic = reader.token();
  if (magic != "P5" && magic != "P2") throw Error(ErrorCode::Io, "not a PGM file");
  GrayImage image;
  image.width = reader.integer();
  image.height = reader.integer();
  const int maxval = reader.integer();
  if (image.width < 1 || image.height < 1 || maxval < 1 || maxval > 255) {
    throw Error(ErrorCode::Io, "unsupported PGM header");
  }
  const auto n = static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height);
  image.pixels.resize(n);
  auto rescale = [maxval](int v) { return static_cast<std::uint8_t>(maxval == 255 ? v : (v * 255 + maxval / 2) / maxval); };
  if (magic == "P2") {
    for (auto& p : image.pixels) p = rescale(reader.integer());
    return image;
  }
  const auto raster = reader.raster();
  if (raster.size() < n) throw Error(ErrorCode::Io, "truncated PGM raster");
  for (std::size_t i = 0; i < n; ++i) image.pixels[i] = rescale(static_cast<unsigned char>(raster[i]));
  return image;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

}  // namespace antiuav
