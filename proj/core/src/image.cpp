#include "ivs/image.hpp"

#include <cctype>
#include <fstream>
#include <iterator>

#include "ivs/errors.hpp"

namespace ivs {

Image::Image(int w, int h, Rgb fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill.r;
    pixels[i + 1] = fill.g;
    pixels[i + 2] = fill.b;
  }
}

Image crop(const Image& img, int col0, int row0, int width, int height) {
  if (col0 < 0 || row0 < 0 || width < 0 || height < 0 || col0 + width > img.width ||
      row0 + height > img.height)
    throw Error("crop window out of bounds");
  Image out(width, height);
  out.origin_col = img.origin_col + col0;
  out.origin_row = img.origin_row + row0;
  const std::size_t row_bytes = static_cast<std::size_t>(width) * 3;
  for (int r = 0; r < height; ++r) {
    const auto* src = img.pixels.data() + 3 * (static_cast<std::size_t>(row0 + r) * img.width + col0);
    std::copy(src, src + row_bytes, out.pixels.data() + r * row_bytes);
  }
  return out;
}

std::string encode_ppm(const Image& img) {
  if (!img.valid()) throw Error("encode_ppm: pixel buffer does not match dimensions");
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
  return out;
}

namespace {

class HeaderReader {
 public:
  HeaderReader(std::span<const std::uint8_t> bytes, const std::string& source)
      : bytes_(bytes), source_(source) {}

  long next_int() {
    skip_space();
    long v = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000) fail("header value too large");
      ++digits;
    }
    if (digits == 0) fail("malformed header");
    return v;
  }
  void expect_magic() {
    if (bytes_.size() < 2 || bytes_[0] != 'P' || bytes_[1] != '6') fail("not a binary PPM (P6)");
    pos_ = 2;
  }
  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) fail("malformed header");
    return pos_ + 1;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw Error("PPM " + source_ + ": " + what);
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace

Image decode_ppm(std::span<const std::uint8_t> bytes, const std::string& source) {
  HeaderReader h(bytes, source);
  h.expect_magic();
  const long w = h.next_int();
  const long ht = h.next_int();
  const long maxval = h.next_int();
  if (maxval != 255) h.fail("only maxval 255 is supported");
  const std::size_t start = h.raster_start();
  const std::size_t need = static_cast<std::size_t>(w) * ht * 3;
  if (bytes.size() - start < need) h.fail("truncated raster");
  Image img;
  img.width = static_cast<int>(w);
  img.height = static_cast<int>(ht);
  img.pixels.assign(bytes.begin() + start, bytes.begin() + start + need);
  return img;
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  const std::string data = encode_ppm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("write failed: " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("missing image file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes, path.string());
}

}  // namespace ivs
