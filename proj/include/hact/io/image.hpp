#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hact/core/error.hpp"

namespace hact {

/// 8-bit interleaved RGB image, row-major.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> data;

  RgbImage() = default;
  RgbImage(std::size_t w, std::size_t h, std::uint8_t fill = 255)
      : width(w), height(h), data(w * h * 3, fill) {}

  std::size_t pixel_count() const noexcept { return width * height; }

  std::uint8_t* pixel(std::size_t x, std::size_t y) noexcept { return &data[(y * width + x) * 3]; }
  const std::uint8_t* pixel(std::size_t x, std::size_t y) const noexcept {
    return &data[(y * width + x) * 3];
  }

  void set(std::size_t x, std::size_t y, std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
    auto* p = pixel(x, y);
    p[0] = r;
    p[1] = g;
    p[2] = b;
  }

  void validate() const {
    require(width >= 1 && height >= 1, Errc::invalid_argument, "image must be at least 1x1");
    require(data.size() == width * height * 3, Errc::shape_mismatch,
            "image buffer holds " + std::to_string(data.size()) + " bytes, expected " +
                std::to_string(width * height * 3));
  }

  friend bool operator==(const RgbImage&, const RgbImage&) = default;
};

/// Per-pixel integer labels (row-major), used for superpixel and nucleus maps.
struct LabelImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint32_t> labels;

  LabelImage() = default;
  LabelImage(std::size_t w, std::size_t h, std::uint32_t fill = 0)
      : width(w), height(h), labels(w * h, fill) {}

  std::uint32_t& at(std::size_t x, std::size_t y) noexcept { return labels[y * width + x]; }
  std::uint32_t at(std::size_t x, std::size_t y) const noexcept { return labels[y * width + x]; }

  friend bool operator==(const LabelImage&, const LabelImage&) = default;
};

/// 8-bit luminance (ITU-R 601 weights), used by the texture descriptors.
inline std::vector<std::uint8_t> to_gray(const RgbImage& img) {
  std::vector<std::uint8_t> g(img.pixel_count());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto* p = &img.data[i * 3];
    const double v = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
    g[i] = static_cast<std::uint8_t>(v + 0.5 > 255.0 ? 255.0 : v + 0.5);
  }
  return g;
}

}  // namespace hact
