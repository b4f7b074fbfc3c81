#include "lanefit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>

#include "lanefit/errors.hpp"

namespace lanefit {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  in >> magic;
  auto next_int = [&]() {
    int value = 0;
    while (in >> std::ws && in.peek() == '#') {
      std::string comment;
      std::getline(in, comment);
    }
    if (!(in >> value)) throw FormatError(path.string() + ": truncated PGM header");
    return value;
  };
  if (magic != "P5") throw FormatError(path.string() + ": only binary PGM (P5) is supported");
  GrayImage img;
  img.width = next_int();
  img.height = next_int();
  const int maxval = next_int();
  if (maxval != 255 || img.width <= 0 || img.height <= 0) {
    throw FormatError(path.string() + ": PGM must be 8-bit with positive size");
  }
  in.get();
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  in.read(reinterpret_cast<char*>(img.pixels.data()),
          static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw FormatError(path.string() + ": truncated PGM data");
  }
  return img;
}

GrayImage read_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) throw IoError("cannot open " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng initialisation failed");
  }
  GrayImage img;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": corrupt PNG");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  const auto depth = png_get_bit_depth(png, info);
  if (depth != 8 || (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_PALETTE)) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw FormatError(path.string() + ": label map must be an 8-bit grayscale or palette PNG");
  }
  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
  for (int r = 0; r < img.height; ++r) {
    rows[static_cast<std::size_t>(r)] = img.pixels.data() + static_cast<std::size_t>(r) * img.width;
  }
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_rows(const std::filesystem::path& path, int width, int height, int color_type,
                int channels, const std::uint8_t* data) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(width) * channels;
  for (int r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(data + static_cast<std::size_t>(r) * stride));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

RgbImage::RgbImage(int w, int h, Color fill) : width(w), height(h) {
  pixels.resize(static_cast<std::size_t>(w) * h * 3);
  for (std::size_t i = 0; i < pixels.size(); i += 3) {
    pixels[i] = fill[0];
    pixels[i + 1] = fill[1];
    pixels[i + 2] = fill[2];
  }
}

void RgbImage::dot(int u, int v, int radius, Color c) {
  for (int dv = -radius; dv <= radius; ++dv) {
    for (int du = -radius; du <= radius; ++du) {
      if (du * du + dv * dv <= radius * radius) set(u + du, v + dv, c);
    }
  }
}

void RgbImage::line(double u0, double v0, double u1, double v1, int radius, Color c) {
  const double len = std::max(std::abs(u1 - u0), std::abs(v1 - v0));
  const int steps = std::max(1, static_cast<int>(std::ceil(len)));
  for (int k = 0; k <= steps; ++k) {
    const double t = static_cast<double>(k) / steps;
    dot(static_cast<int>(std::lround(u0 + t * (u1 - u0))),
        static_cast<int>(std::lround(v0 + t * (v1 - v0))), radius, c);
  }
}

void RgbImage::fill_rect(int u0, int v0, int u1, int v1, Color c) {
  for (int v = std::max(0, v0); v <= std::min(height - 1, v1); ++v) {
    for (int u = std::max(0, u0); u <= std::min(width - 1, u1); ++u) set(u, v, c);
  }
}

GrayImage read_gray8(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("cannot read " + path.string());
  }
  std::ifstream probe(path, std::ios::binary);
  char head[8] = {};
  probe.read(head, sizeof head);
  if (!probe && probe.gcount() < 2) throw IoError("cannot read " + path.string());
  static constexpr unsigned char kPngMagic[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (probe.gcount() == 8 && std::equal(head, head + 8, kPngMagic,
                                        [](char a, unsigned char b) {
                                          return static_cast<unsigned char>(a) == b;
                                        })) {
    return read_png(path);
  }
  if (head[0] == 'P') return read_pgm(path);
  throw FormatError(path.string() + ": unrecognised image format");
}

void write_png(const std::filesystem::path& path, const GrayImage& image) {
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_GRAY, 1, image.pixels.data());
}

void write_png(const std::filesystem::path& path, const RgbImage& image) {
  write_rows(path, image.width, image.height, PNG_COLOR_TYPE_RGB, 3, image.pixels.data());
}

}  // namespace lanefit
