#pragma once

#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hact/core/error.hpp"
#include "hact/io/image.hpp"
#include "hact/stain/macenko.hpp"

namespace hact::entity {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

/// Detected nuclei. When instance_labels is present, nucleus i owns the
/// pixels labelled i + 1 (0 = background).
struct NucleiSet {
  std::vector<Point> centroids;
  std::optional<LabelImage> instance_labels;

  std::size_t size() const noexcept { return centroids.size(); }
};

/// Reads `x,y` rows (0-indexed pixel coordinates). Blank lines and a leading
/// `x,y` header are skipped; duplicate rows are kept as distinct nuclei.
inline NucleiSet load_nuclei_centroids(std::istream& in, std::size_t width, std::size_t height,
                                       const std::string& source = "<stream>") {
  NucleiSet out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (lineno == 1 && (line == "x,y" || line == "X,Y")) continue;
    std::istringstream row(line);
    double x = 0, y = 0;
    char comma = 0;
    if (!(row >> x >> comma >> y) || comma != ',')
      fail(Errc::parse_error, source + ":" + std::to_string(lineno) + ": expected `x,y`, got '" + line + "'");
    if (x < 0 || y < 0 || x >= static_cast<double>(width) || y >= static_cast<double>(height))
      fail(Errc::out_of_bounds, source + ":" + std::to_string(lineno) + ": centroid (" + line +
                                    ") outside " + std::to_string(width) + "x" + std::to_string(height) +
                                    " image");
    out.centroids.push_back({x, y});
  }
  if (out.centroids.empty()) fail(Errc::no_nuclei, source + ": no nuclei listed");
  return out;
}

inline NucleiSet load_nuclei_centroids(const std::string& path, std::size_t width, std::size_t height) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  return load_nuclei_centroids(in, width, height, path);
}

/// Hematoxylin concentration per pixel by colour deconvolution. Uses the given
/// H and E directions, or the standard Ruifrok-Johnston ones when none are given;
/// the third basis vector is the residual H x E.
inline std::vector<double> hematoxylin_density(const RgbImage& image, const stain::StainBasis* stains = nullptr) {
  Eigen::Vector3d h(0.65, 0.70, 0.29), e(0.07, 0.99, 0.11);
  if (stains) {
    h = Eigen::Vector3d(stains->stain_vectors[0][0], stains->stain_vectors[0][1], stains->stain_vectors[0][2]);
    e = Eigen::Vector3d(stains->stain_vectors[1][0], stains->stain_vectors[1][1], stains->stain_vectors[1][2]);
  }
  h.normalize();
  e.normalize();
  Eigen::Matrix3d basis;
  basis << h, e, h.cross(e).normalized();
  const Eigen::RowVector3d h_row = basis.inverse().row(0);
  std::vector<double> out(image.pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto* p = &image.data[i * 3];
    const Eigen::Vector3d od(stain::optical_density(p[0]), stain::optical_density(p[1]),
                             stain::optical_density(p[2]));
    out[i] = h_row.dot(od);
  }
  return out;
}

/// Stain basis estimated from the image itself, or nullopt when the image has
/// too little tissue or a single stain.
inline std::optional<stain::StainBasis> image_stains(const RgbImage& image) {
  try {
    return stain::estimate_stain_basis(stain::od_transform(image).od_matrix);
  } catch (const Error& e) {
    if (e.code() == Errc::no_tissue || e.code() == Errc::degenerate_stain) return std::nullopt;
    throw;
  }
}

/// 4-connected components of a boolean mask, labelled 1.. in raster order of
/// their first pixel.
inline LabelImage connected_components(const std::vector<std::uint8_t>& mask, std::size_t width,
                                       std::size_t height, std::uint32_t* count = nullptr) {
  LabelImage labels(width, height, 0);
  std::uint32_t next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask[start] || labels.labels[start]) continue;
    ++next;
    labels.labels[start] = next;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      const std::size_t x = i % width, y = i / width;
      auto visit = [&](std::size_t j) {
        if (mask[j] && !labels.labels[j]) {
          labels.labels[j] = next;
          stack.push_back(j);
        }
      };
      if (x > 0) visit(i - 1);
      if (x + 1 < width) visit(i + 1);
      if (y > 0) visit(i - width);
      if (y + 1 < height) visit(i + width);
    }
  }
  if (count) *count = next;
  return labels;
}

/// Fallback detector for synthetic or desk-scale data: thresholds the
/// Hematoxylin density and keeps 4-connected blobs with area in [min_area, max_area].
/// Deconvolution uses the image's own stain basis when it can be estimated.
inline NucleiSet detect_nuclei_blob(const RgbImage& image, double od_threshold = 0.3,
                                    std::size_t min_area = 10, std::size_t max_area = 2000) {
  image.validate();
  require(min_area > 0 && min_area < max_area, Errc::invalid_argument,
          "blob detection requires 0 < min_area < max_area");
  const auto stains = image_stains(image);
  const auto hd = hematoxylin_density(image, stains ? &*stains : nullptr);
  std::vector<std::uint8_t> mask(hd.size());
  for (std::size_t i = 0; i < hd.size(); ++i) mask[i] = hd[i] > od_threshold;

  std::uint32_t n = 0;
  const LabelImage comps = connected_components(mask, image.width, image.height, &n);
  std::vector<std::size_t> area(n + 1, 0);
  std::vector<double> sx(n + 1, 0.0), sy(n + 1, 0.0);
  for (std::size_t i = 0; i < comps.labels.size(); ++i) {
    const auto l = comps.labels[i];
    if (!l) continue;
    ++area[l];
    sx[l] += static_cast<double>(i % image.width);
    sy[l] += static_cast<double>(i / image.width);
  }

  NucleiSet out;
  std::vector<std::uint32_t> remap(n + 1, 0);
  for (std::uint32_t l = 1; l <= n; ++l) {
    if (area[l] < min_area || area[l] > max_area) continue;
    out.centroids.push_back({sx[l] / static_cast<double>(area[l]), sy[l] / static_cast<double>(area[l])});
    remap[l] = static_cast<std::uint32_t>(out.centroids.size());
  }
  LabelImage inst(image.width, image.height, 0);
  for (std::size_t i = 0; i < inst.labels.size(); ++i) inst.labels[i] = remap[comps.labels[i]];
  out.instance_labels = std::move(inst);
  return out;
}

}  // namespace hact::entity
