#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/graph/entity_graph.hpp"
#include "hact/io/image.hpp"

namespace hact::graph {

struct Pixel {
  std::int32_t x = 0;
  std::int32_t y = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

/// Axis-aligned window [x0, x1) x [y0, y1) inside an image.
struct Window {
  std::size_t x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  std::size_t width() const noexcept { return x1 - x0; }
  std::size_t height() const noexcept { return y1 - y0; }
  std::size_t area() const noexcept { return width() * height(); }
  bool contains(std::int64_t x, std::int64_t y) const noexcept {
    return x >= static_cast<std::int64_t>(x0) && x < static_cast<std::int64_t>(x1) &&
           y >= static_cast<std::int64_t>(y0) && y < static_cast<std::int64_t>(y1);
  }
};

/// Square window of side `size` centred on (cx, cy), clipped to the image.
inline Window centred_window(double cx, double cy, std::size_t size, std::size_t width, std::size_t height) {
  const double half = static_cast<double>(size) / 2.0;
  auto clip = [](double v, std::size_t hi) {
    return static_cast<std::size_t>(std::clamp(std::round(v), 0.0, static_cast<double>(hi)));
  };
  Window w{clip(cx - half, width), clip(cy - half, height), clip(cx + half, width), clip(cy + half, height)};
  if (w.x1 <= w.x0) w.x1 = std::min(width, w.x0 + 1);
  if (w.y1 <= w.y0) w.y1 = std::min(height, w.y0 + 1);
  return w;
}

// ---- GLCM ----------------------------------------------------------------

inline constexpr std::size_t kGlcmLevels = 32;
/// (row, col) offsets, averaged.
inline constexpr std::array<std::array<int, 2>, 4> kGlcmOffsets{{{0, 1}, {1, 0}, {1, 1}, {1, -1}}};

struct GlcmFeatures {
  double dissimilarity = 0.0;
  double homogeneity = 1.0;
  double energy = 1.0;
  double asm_ = 1.0;  // angular second moment
};

inline std::uint8_t quantize(std::uint8_t gray, std::size_t levels = kGlcmLevels) {
  return static_cast<std::uint8_t>(static_cast<std::size_t>(gray) * levels / 256);
}

/// Symmetric, normalised co-occurrence statistics of a row-major gray patch,
/// averaged over the four offsets. A patch with no valid pixel pairs is
/// treated as constant.
inline GlcmFeatures glcm_features(std::span<const std::uint8_t> gray, std::size_t width, std::size_t height,
                                  std::size_t levels = kGlcmLevels) {
  require(gray.size() == width * height, Errc::shape_mismatch, "glcm: patch size mismatch");
  std::vector<std::uint8_t> q(gray.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantize(gray[i], levels);

  GlcmFeatures acc{0.0, 0.0, 0.0, 0.0};
  int used = 0;
  std::vector<double> P(levels * levels);
  for (const auto& [dr, dc] : kGlcmOffsets) {
    std::fill(P.begin(), P.end(), 0.0);
    double total = 0.0;
    for (std::size_t r = 0; r < height; ++r) {
      const auto r2 = static_cast<std::int64_t>(r) + dr;
      if (r2 < 0 || r2 >= static_cast<std::int64_t>(height)) continue;
      for (std::size_t c = 0; c < width; ++c) {
        const auto c2 = static_cast<std::int64_t>(c) + dc;
        if (c2 < 0 || c2 >= static_cast<std::int64_t>(width)) continue;
        const auto a = q[r * width + c];
        const auto b = q[static_cast<std::size_t>(r2) * width + static_cast<std::size_t>(c2)];
        P[a * levels + b] += 1.0;
        P[b * levels + a] += 1.0;
        total += 2.0;
      }
    }
    if (total == 0.0) continue;
    ++used;
    double dis = 0, hom = 0, asm2 = 0;
    for (std::size_t i = 0; i < levels; ++i)
      for (std::size_t j = 0; j < levels; ++j) {
        const double p = P[i * levels + j] / total;
        if (p == 0.0) continue;
        const double d = static_cast<double>(i) - static_cast<double>(j);
        dis += p * std::abs(d);
        hom += p / (1.0 + d * d);
        asm2 += p * p;
      }
    acc.dissimilarity += dis;
    acc.homogeneity += hom;
    acc.asm_ += asm2;
    acc.energy += std::sqrt(asm2);
  }
  if (used == 0) return {};
  const double inv = 1.0 / used;
  return {acc.dissimilarity * inv, acc.homogeneity * inv, acc.energy * inv, acc.asm_ * inv};
}

// ---- Shape ---------------------------------------------------------------

struct ShapeFeatures {
  double eccentricity = 0, area = 0, major_axis = 0, minor_axis = 0, perimeter = 0, solidity = 1,
         orientation = 0;
};

namespace detail {

inline double cross(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

/// Area of the convex hull of the pixel squares (monotone chain).
inline double convex_hull_area(std::span<const Pixel> mask) {
  std::vector<std::array<double, 2>> pts;
  {
    std::vector<std::array<std::int32_t, 3>> spans;  // y, min x, max x
    std::vector<Pixel> sorted(mask.begin(), mask.end());
    std::sort(sorted.begin(), sorted.end(), [](const Pixel& a, const Pixel& b) {
      return a.y != b.y ? a.y < b.y : a.x < b.x;
    });
    for (const auto& p : sorted) {
      if (spans.empty() || spans.back()[0] != p.y) spans.push_back({p.y, p.x, p.x});
      else spans.back()[2] = p.x;
    }
    for (const auto& [y, lo, hi] : spans) {
      pts.push_back({double(lo), double(y)});
      pts.push_back({double(lo), double(y + 1)});
      pts.push_back({double(hi + 1), double(y)});
      pts.push_back({double(hi + 1), double(y + 1)});
    }
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  std::vector<std::array<double, 2>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  double area = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a[0] * b[1] - b[0] * a[1];
  }
  return std::abs(area) / 2.0;
}

}  // namespace detail

/// Moment-based shape descriptors of a pixel set. Perimeter is the crack
/// length (pixel edges shared with the outside); a single pixel has
/// perimeter 0 and eccentricity 0 by convention.
inline ShapeFeatures shape_features(std::span<const Pixel> mask) {
  require(!mask.empty(), Errc::invalid_argument, "shape features need a non-empty mask");
  ShapeFeatures f;
  const double n = static_cast<double>(mask.size());
  f.area = n;
  if (mask.size() == 1) return f;

  double mx = 0, my = 0;
  for (const auto& p : mask) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  double mu20 = 0, mu02 = 0, mu11 = 0;
  for (const auto& p : mask) {
    const double dx = p.x - mx, dy = p.y - my;
    mu20 += dx * dx;
    mu02 += dy * dy;
    mu11 += dx * dy;
  }
  mu20 /= n;
  mu02 /= n;
  mu11 /= n;
  const double common = std::sqrt((mu20 - mu02) * (mu20 - mu02) + 4.0 * mu11 * mu11);
  const double l1 = (mu20 + mu02 + common) / 2.0;
  const double l2 = std::max(0.0, (mu20 + mu02 - common) / 2.0);
  f.major_axis = 4.0 * std::sqrt(l1);
  f.minor_axis = 4.0 * std::sqrt(l2);
  f.eccentricity = l1 > 0 ? std::sqrt(std::max(0.0, 1.0 - l2 / l1)) : 0.0;
  f.orientation = 0.5 * std::atan2(2.0 * mu11, mu20 - mu02);

  std::vector<Pixel> sorted(mask.begin(), mask.end());
  auto less = [](const Pixel& a, const Pixel& b) { return a.y != b.y ? a.y < b.y : a.x < b.x; };
  std::sort(sorted.begin(), sorted.end(), less);
  auto has = [&](std::int32_t x, std::int32_t y) {
    return std::binary_search(sorted.begin(), sorted.end(), Pixel{x, y}, less);
  };
  double crack = 0;
  for (const auto& p : sorted)
    crack += !has(p.x - 1, p.y) + !has(p.x + 1, p.y) + !has(p.x, p.y - 1) + !has(p.x, p.y + 1);
  f.perimeter = crack;
  const double hull = detail::convex_hull_area(mask);
  f.solidity = hull > 0 ? std::min(1.0, n / hull) : 1.0;
  return f;
}

// ---- Hand-crafted descriptor -----------------------------------------------

inline constexpr std::size_t kHandcraftedDim = 16;
using HandcraftedVector = std::array<double, kHandcraftedDim>;

/// Mean Shannon entropy (bits) of 32-level histograms over 5x5 neighbourhoods.
inline double mean_local_entropy(std::span<const std::uint8_t> gray, std::size_t width, std::size_t height) {
  if (gray.empty()) return 0.0;
  std::vector<std::uint8_t> q(gray.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = quantize(gray[i]);
  double total = 0;
  std::array<int, kGlcmLevels> hist{};
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      hist.fill(0);
      int count = 0;
      const std::size_t ya = y >= 2 ? y - 2 : 0, yb = std::min(height, y + 3);
      const std::size_t xa = x >= 2 ? x - 2 : 0, xb = std::min(width, x + 3);
      for (std::size_t yy = ya; yy < yb; ++yy)
        for (std::size_t xx = xa; xx < xb; ++xx) {
          ++hist[q[yy * width + xx]];
          ++count;
        }
      double h = 0;
      for (int c : hist)
        if (c) {
          const double p = static_cast<double>(c) / count;
          h -= p * std::log2(p);
        }
      total += h;
    }
  return total / static_cast<double>(gray.size());
}

/// 16-dim descriptor of one entity, in this order:
///  0 mean intensity difference (mask minus rest of window)   8 eccentricity
///  1 intensity std over the mask                              9 area
///  2 intensity skewness over the mask                        10 major axis length
///  3 mean local entropy of the window                        11 minor axis length
///  4 GLCM dissimilarity                                       12 perimeter
///  5 GLCM homogeneity                                         13 solidity
///  6 GLCM energy                                              14 orientation
///  7 GLCM angular second moment                               15 mask pixels inside the window
/// The window is a patch_size square centred on the mask centroid, or the
/// mask bounding box when patch_size is 0.
inline HandcraftedVector handcrafted_features(const RgbImage& image, std::span<const std::uint8_t> gray,
                                              std::span<const Pixel> mask, std::size_t patch_size) {
  require(!mask.empty(), Errc::invalid_argument, "handcrafted features need a non-empty mask");
  require(gray.size() == image.pixel_count(), Errc::shape_mismatch, "gray buffer size mismatch");
  double cx = 0, cy = 0;
  std::int32_t minx = mask[0].x, maxx = mask[0].x, miny = mask[0].y, maxy = mask[0].y;
  for (const auto& p : mask) {
    require(p.x >= 0 && p.y >= 0 && static_cast<std::size_t>(p.x) < image.width &&
                static_cast<std::size_t>(p.y) < image.height,
            Errc::out_of_bounds, "mask pixel outside the image");
    cx += p.x;
    cy += p.y;
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  cx /= static_cast<double>(mask.size());
  cy /= static_cast<double>(mask.size());
  const Window win = patch_size > 0 ? centred_window(cx + 0.5, cy + 0.5, patch_size, image.width, image.height)
                                    : Window{std::size_t(minx), std::size_t(miny), std::size_t(maxx + 1),
                                             std::size_t(maxy + 1)};

  std::vector<std::uint8_t> patch(win.area());
  std::vector<std::uint8_t> in_mask(win.area(), 0);
  for (std::size_t y = win.y0; y < win.y1; ++y)
    for (std::size_t x = win.x0; x < win.x1; ++x)
      patch[(y - win.y0) * win.width() + (x - win.x0)] = gray[y * image.width + x];
  std::size_t inside = 0;
  for (const auto& p : mask)
    if (win.contains(p.x, p.y)) {
      auto& m = in_mask[(p.y - win.y0) * win.width() + (p.x - win.x0)];
      if (!m) ++inside;
      m = 1;
    }

  double fg = 0, bg = 0;
  std::size_t nbg = 0;
  for (std::size_t i = 0; i < patch.size(); ++i) {
    if (in_mask[i]) fg += patch[i];
    else {
      bg += patch[i];
      ++nbg;
    }
  }
  const double contrast = (inside && nbg) ? fg / inside - bg / nbg : 0.0;

  double mean = 0;
  for (const auto& p : mask) mean += gray[p.y * image.width + p.x];
  mean /= static_cast<double>(mask.size());
  double m2 = 0, m3 = 0;
  for (const auto& p : mask) {
    const double d = gray[p.y * image.width + p.x] - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= static_cast<double>(mask.size());
  m3 /= static_cast<double>(mask.size());
  const double sd = std::sqrt(m2);
  const double skew = sd > 1e-12 ? m3 / (sd * sd * sd) : 0.0;

  const GlcmFeatures glcm = glcm_features(patch, win.width(), win.height());
  const ShapeFeatures shape = shape_features(mask);
  return {contrast,
          sd,
          skew,
          mean_local_entropy(patch, win.width(), win.height()),
          glcm.dissimilarity,
          glcm.homogeneity,
          glcm.energy,
          glcm.asm_,
          shape.eccentricity,
          shape.area,
          shape.major_axis,
          shape.minor_axis,
          shape.perimeter,
          shape.solidity,
          shape.orientation,
          static_cast<double>(inside)};
}

inline HandcraftedVector handcrafted_features(const RgbImage& image, std::span<const Pixel> mask,
                                              std::size_t patch_size = 0) {
  const auto gray = to_gray(image);
  return handcrafted_features(image, gray, mask, patch_size);
}

// ---- Spatial & region pooling ---------------------------------------------

/// Centroid normalised by the image dimensions.
inline std::array<double, 2> spatial_features(Point centroid, std::size_t width, std::size_t height) {
  require(centroid.x >= 0 && centroid.y >= 0 && centroid.x <= static_cast<double>(width) &&
              centroid.y <= static_cast<double>(height),
          Errc::out_of_bounds, "centroid outside the image");
  return {centroid.x / static_cast<double>(width), centroid.y / static_cast<double>(height)};
}

/// Row r of the result is the mean of the superpixel rows listed in membership[r].
inline Tensor region_feature_average(const Tensor& superpixel_features,
                                     const std::vector<std::vector<std::uint32_t>>& membership) {
  Tensor out = Tensor::matrix(membership.size(), superpixel_features.cols());
  for (std::size_t r = 0; r < membership.size(); ++r) {
    require(!membership[r].empty(), Errc::invalid_argument,
            "region " + std::to_string(r) + " has no constituent superpixels");
    auto dst = out.row(r);
    for (auto s : membership[r]) {
      require(s < superpixel_features.rows(), Errc::out_of_bounds, "superpixel id out of range");
      auto src = superpixel_features.row(s);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
    for (auto& v : dst) v /= static_cast<double>(membership[r].size());
  }
  return out;
}

}  // namespace hact::graph
