#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

namespace lanefit {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, 3 bytes per pixel

  using Color = std::array<std::uint8_t, 3>;

  RgbImage() = default;
  RgbImage(int w, int h, Color fill = {0, 0, 0});

  bool inside(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
  void set(int u, int v, Color c) {
    if (!inside(u, v)) return;
    auto* p = &pixels[(static_cast<std::size_t>(v) * width + u) * 3];
    p[0] = c[0];
    p[1] = c[1];
    p[2] = c[2];
  }
  Color at(int u, int v) const {
    const auto* p = &pixels[(static_cast<std::size_t>(v) * width + u) * 3];
    return {p[0], p[1], p[2]};
  }

  // Filled disc of the given radius.
  void dot(int u, int v, int radius, Color c);
  void line(double u0, double v0, double u1, double v1, int radius, Color c);
  void fill_rect(int u0, int v0, int u1, int v1, Color c);
};

// Reads an 8-bit single-channel image: grayscale or palette PNG (palette
// indices are returned as-is) or binary PGM. Throws IoError when the file
// cannot be read and FormatError for any other pixel layout.
GrayImage read_gray8(const std::filesystem::path& path);

void write_png(const std::filesystem::path& path, const GrayImage& image);
void write_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace lanefit
