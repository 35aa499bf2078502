#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ivs {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend constexpr bool operator==(const Rgb&, const Rgb&) = default;
};

// Row-major 8-bit RGB raster. origin_col/origin_row place the raster inside
// the camera frame it was cut from ((0, 0) for a full frame); they are not
// part of the PPM payload.
struct Image {
  int width = 0;
  int height = 0;
  int origin_col = 0;
  int origin_row = 0;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int w, int h, Rgb fill = {});

  Rgb at(int col, int row) const {
    const std::size_t i = 3 * (static_cast<std::size_t>(row) * width + col);
    return {pixels[i], pixels[i + 1], pixels[i + 2]};
  }
  void set(int col, int row, Rgb c) {
    const std::size_t i = 3 * (static_cast<std::size_t>(row) * width + col);
    pixels[i] = c.r;
    pixels[i + 1] = c.g;
    pixels[i + 2] = c.b;
  }
  bool valid() const {
    return width >= 0 && height >= 0 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }
  friend bool operator==(const Image&, const Image&) = default;
};

// Sub-rectangle copy. Throws Error if the rectangle leaves the image.
Image crop(const Image& img, int col0, int row0, int width, int height);

// Binary PPM (P6, maxval 255), no comments, single whitespace separators.
std::string encode_ppm(const Image& img);
Image decode_ppm(std::span<const std::uint8_t> bytes, const std::string& source = "<memory>");
void write_ppm(const std::filesystem::path& path, const Image& img);
Image read_ppm(const std::filesystem::path& path);

}  // namespace ivs
