#pragma once

// PNG codecs for RGB images and 16-bit label maps. Requires linking libpng.

#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "hact/core/error.hpp"
#include "hact/io/image.hpp"

namespace hact::png {

namespace detail {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

inline FilePtr open(const std::string& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) fail(Errc::io_error, "cannot open " + path);
  return f;
}

inline void write_rows(const std::string& path, std::size_t width, std::size_t height, int bit_depth,
                       int color_type, const std::vector<png_bytep>& rows) {
  auto file = open(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::io_error, "libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(Errc::io_error, "failed writing " + path);
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  if (bit_depth == 16) png_set_swap(png);  // rows are host-order (little-endian) uint16
  png_write_image(png, const_cast<png_bytepp>(rows.data()));
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace detail

/// Reads any PNG and converts it to 8-bit RGB (alpha dropped, gray expanded).
inline RgbImage read_rgb(const std::string& path) {
  auto file = detail::open(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::io_error, "libpng initialisation failed");
  }
  RgbImage img;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::io_error, "failed reading " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  const auto color = png_get_color_type(png, info);
  if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) {
    png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  img.width = png_get_image_width(png, info);
  img.height = png_get_image_height(png, info);
  img.data.resize(img.width * img.height * 3);
  rows.resize(img.height);
  for (std::size_t y = 0; y < img.height; ++y) rows[y] = &img.data[y * img.width * 3];
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

inline void write_rgb(const std::string& path, const RgbImage& img) {
  img.validate();
  std::vector<png_bytep> rows(img.height);
  for (std::size_t y = 0; y < img.height; ++y)
    rows[y] = const_cast<png_bytep>(&img.data[y * img.width * 3]);
  detail::write_rows(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, rows);
}

/// Writes labels as a 16-bit grayscale PNG. Labels must fit in 16 bits.
inline void write_labels16(const std::string& path, const LabelImage& labels) {
  std::vector<std::uint16_t> buf(labels.labels.size());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    if (labels.labels[i] > 0xFFFF) fail(Errc::invalid_argument, "label exceeds 16 bits");
    buf[i] = static_cast<std::uint16_t>(labels.labels[i]);
  }
  std::vector<png_bytep> rows(labels.height);
  for (std::size_t y = 0; y < labels.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(&buf[y * labels.width]);
  detail::write_rows(path, labels.width, labels.height, 16, PNG_COLOR_TYPE_GRAY, rows);
}

inline LabelImage read_labels16(const std::string& path) {
  auto file = detail::open(path, "rb");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::io_error, "libpng initialisation failed");
  }
  LabelImage out;
  std::vector<std::uint16_t> buf;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::io_error, "failed reading " + path);
  }
  png_init_io(png, file.get());
  png_read_info(png, info);
  if (png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY || png_get_bit_depth(png, info) != 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(Errc::parse_error, path + " is not a 16-bit grayscale label image");
  }
  png_set_swap(png);
  out.width = png_get_image_width(png, info);
  out.height = png_get_image_height(png, info);
  buf.resize(out.width * out.height);
  rows.resize(out.height);
  for (std::size_t y = 0; y < out.height; ++y)
    rows[y] = reinterpret_cast<png_bytep>(&buf[y * out.width]);
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  out.labels.assign(buf.begin(), buf.end());
  return out;
}

}  // namespace hact::png
