#pragma once

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/entity/nuclei.hpp"
#include "hact/entity/superpixel.hpp"
#include "hact/graph/entity_graph.hpp"
#include "hact/graph/features.hpp"
#include "hact/graph/topology.hpp"

namespace hact::graph {

enum class FeatureMode { none, handcrafted, external };

inline FeatureMode parse_feature_mode(const std::string& s) {
  if (s == "none") return FeatureMode::none;
  if (s == "handcrafted") return FeatureMode::handcrafted;
  if (s == "external") return FeatureMode::external;
  fail(Errc::invalid_argument, "unknown feature mode '" + s + "'");
}

/// How node features are produced. External mode reads one CSV row per
/// entity (cells in nucleus order; tissue rows either per oversegmented
/// superpixel, averaged into merged regions, or directly per merged region).
struct FeatureSpec {
  FeatureMode mode = FeatureMode::handcrafted;
  std::size_t patch_size_cell = 72;
  std::size_t patch_size_tissue = 144;
  std::optional<std::string> external_cell_path;
  std::optional<std::string> external_tissue_path;

  void validate() const {
    const bool has_paths = external_cell_path.has_value() || external_tissue_path.has_value();
    require((mode == FeatureMode::external) == has_paths, Errc::invalid_argument,
            "external feature paths must be given exactly when mode is external");
    if (mode == FeatureMode::external)
      require(external_cell_path && external_tissue_path, Errc::invalid_argument,
              "external mode needs both cell and tissue feature files");
  }
};

/// Oversegmented superpixels and the merged tissue regions built from them.
struct TissueSegmentation {
  entity::SuperpixelMap superpixels;
  entity::SuperpixelMap regions;
};

inline std::size_t pixel_index(double v, std::size_t extent) {
  const auto r = std::llround(v);
  return static_cast<std::size_t>(std::clamp<long long>(r, 0, static_cast<long long>(extent) - 1));
}

/// Binary cell-to-tissue assignment, as the region index of every nucleus.
/// With instance masks a nucleus goes to the region it overlaps most (ties to
/// the smaller region id); otherwise to the region containing its centroid.
inline std::vector<std::uint32_t> build_assignment(const entity::NucleiSet& nuclei, const entity::SuperpixelMap& map) {
  const std::size_t w = map.width(), h = map.height();
  std::vector<std::uint32_t> out(nuclei.size(), 0);
  std::vector<std::vector<std::size_t>> overlap;
  if (nuclei.instance_labels) {
    const auto& inst = *nuclei.instance_labels;
    require(inst.width == w && inst.height == h, Errc::shape_mismatch,
            "instance label map and superpixel map dimensions differ");
    overlap.assign(nuclei.size(), std::vector<std::size_t>(map.region_count, 0));
    for (std::size_t i = 0; i < inst.labels.size(); ++i) {
      const auto id = inst.labels[i];
      if (id == 0 || id > nuclei.size()) continue;
      ++overlap[id - 1][map.labels.labels[i]];
    }
  }
  for (std::size_t n = 0; n < nuclei.size(); ++n) {
    const auto& c = nuclei.centroids[n];
    require(c.x >= 0 && c.y >= 0 && c.x < static_cast<double>(w) && c.y < static_cast<double>(h),
            Errc::out_of_bounds, "nucleus " + std::to_string(n) + " lies outside the superpixel map");
    if (!overlap.empty()) {
      const auto& ov = overlap[n];
      const auto best = std::max_element(ov.begin(), ov.end());  // first maximum = smaller id
      if (*best > 0) {
        out[n] = static_cast<std::uint32_t>(best - ov.begin());
        continue;
      }
    }
    out[n] = map.at(pixel_index(c.x, w), pixel_index(c.y, h));
  }
  return out;
}

inline Tensor load_feature_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  std::vector<double> vals;
  std::size_t rows = 0, cols = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t n = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        vals.push_back(std::stod(cell));
      } catch (const std::exception&) {
        fail(Errc::parse_error, path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
      ++n;
    }
    if (rows == 0) cols = n;
    require(n == cols, Errc::parse_error, path + ":" + std::to_string(lineno) + ": expected " +
                                              std::to_string(cols) + " columns, got " + std::to_string(n));
    ++rows;
  }
  return Tensor({rows, cols}, std::move(vals));
}

namespace detail {

inline std::vector<std::vector<Pixel>> pixels_by_label(const LabelImage& labels, std::size_t count, bool one_based) {
  std::vector<std::vector<Pixel>> out(count);
  for (std::size_t y = 0; y < labels.height; ++y)
    for (std::size_t x = 0; x < labels.width; ++x) {
      auto l = labels.at(x, y);
      if (one_based) {
        if (l == 0 || l > count) continue;
        --l;
      }
      out[l].push_back({static_cast<std::int32_t>(x), static_cast<std::int32_t>(y)});
    }
  return out;
}

/// Disk of radius 4 around a centroid, for nuclei given without instance masks.
inline std::vector<Pixel> disk_mask(Point c, std::size_t w, std::size_t h, int radius = 4) {
  std::vector<Pixel> out;
  const auto cx = static_cast<std::int32_t>(pixel_index(c.x, w));
  const auto cy = static_cast<std::int32_t>(pixel_index(c.y, h));
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy > radius * radius) continue;
      const auto x = cx + dx, y = cy + dy;
      if (x < 0 || y < 0 || x >= static_cast<std::int32_t>(w) || y >= static_cast<std::int32_t>(h)) continue;
      out.push_back({x, y});
    }
  return out;
}

inline Tensor with_spatial(const Tensor& morph, std::span<const Point> centroids, std::size_t w, std::size_t h) {
  Tensor spatial = Tensor::matrix(centroids.size(), 2);
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    const auto s = spatial_features(centroids[i], w, h);
    spatial(i, 0) = s[0];
    spatial(i, 1) = s[1];
  }
  if (morph.cols() == 0) return spatial;
  return hconcat(morph, spatial);
}

inline std::vector<Point> region_centroids(const entity::SuperpixelMap& map) {
  std::vector<Point> c(map.region_count);
  std::vector<double> n(map.region_count, 0.0);
  for (std::size_t y = 0; y < map.height(); ++y)
    for (std::size_t x = 0; x < map.width(); ++x) {
      const auto l = map.at(x, y);
      c[l].x += static_cast<double>(x);
      c[l].y += static_cast<double>(y);
      n[l] += 1.0;
    }
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i].x /= n[i];
    c[i].y /= n[i];
  }
  return c;
}

}  // namespace detail

/// Builds the full hierarchical graph. Node features are the morphological
/// block chosen by `spec` followed by the two normalised centroid coordinates.
inline HactGraph assemble_hact(const RgbImage& image, const entity::NucleiSet& nuclei, const TissueSegmentation& seg,
                               const FeatureSpec& spec, std::size_t k = 5, double d_min = 50.0) {
  image.validate();
  spec.validate();
  seg.superpixels.validate();
  seg.regions.validate();
  require(seg.regions.width() == image.width && seg.regions.height() == image.height, Errc::shape_mismatch,
          "segmentation dimensions differ from the image");
  const std::size_t w = image.width, h = image.height;
  const auto membership = entity::region_membership(seg.superpixels, seg.regions);

  HactGraph g;
  g.width = w;
  g.height = h;
  g.cell_graph.node_count = nuclei.size();
  g.cell_graph.centroids = nuclei.centroids;
  g.cell_graph.edges = build_cell_topology(nuclei.centroids, k, d_min);
  g.tissue_graph.node_count = seg.regions.region_count;
  g.tissue_graph.centroids = detail::region_centroids(seg.regions);
  g.tissue_graph.edges = build_tissue_topology(seg.regions);
  g.cell_region = build_assignment(nuclei, seg.regions);

  Tensor cell_morph = Tensor::matrix(nuclei.size(), 0);
  Tensor tissue_morph = Tensor::matrix(seg.regions.region_count, 0);
  if (spec.mode == FeatureMode::handcrafted) {
    const auto gray = to_gray(image);
    cell_morph = Tensor::matrix(nuclei.size(), kHandcraftedDim);
    std::vector<std::vector<Pixel>> inst;
    if (nuclei.instance_labels) inst = detail::pixels_by_label(*nuclei.instance_labels, nuclei.size(), true);
    for (std::size_t i = 0; i < nuclei.size(); ++i) {
      std::vector<Pixel> mask = inst.empty() || inst[i].empty() ? detail::disk_mask(nuclei.centroids[i], w, h)
                                                                : inst[i];
      const auto f = handcrafted_features(image, gray, mask, spec.patch_size_cell);
      std::copy(f.begin(), f.end(), cell_morph.row(i).begin());
    }
    const auto sp_pixels = detail::pixels_by_label(seg.superpixels.labels, seg.superpixels.region_count, false);
    Tensor sp = Tensor::matrix(sp_pixels.size(), kHandcraftedDim);
    for (std::size_t s = 0; s < sp_pixels.size(); ++s) {
      const auto f = handcrafted_features(image, gray, sp_pixels[s], spec.patch_size_tissue);
      std::copy(f.begin(), f.end(), sp.row(s).begin());
    }
    tissue_morph = region_feature_average(sp, membership);
  } else if (spec.mode == FeatureMode::external) {
    cell_morph = load_feature_csv(*spec.external_cell_path);
    if (cell_morph.rows() != nuclei.size())
      fail(Errc::shape_mismatch, "cell feature file " + *spec.external_cell_path + " has " +
                                     std::to_string(cell_morph.rows()) + " rows, expected " +
                                     std::to_string(nuclei.size()));
    Tensor t = load_feature_csv(*spec.external_tissue_path);
    if (t.rows() == seg.superpixels.region_count) tissue_morph = region_feature_average(t, membership);
    else if (t.rows() == seg.regions.region_count) tissue_morph = std::move(t);
    else
      fail(Errc::shape_mismatch, "tissue feature file " + *spec.external_tissue_path + " has " +
                                     std::to_string(t.rows()) + " rows, expected " +
                                     std::to_string(seg.superpixels.region_count) + " (superpixels) or " +
                                     std::to_string(seg.regions.region_count) + " (regions)");
  }
  g.cell_graph.features = detail::with_spatial(cell_morph, g.cell_graph.centroids, w, h);
  g.tissue_graph.features = detail::with_spatial(tissue_morph, g.tissue_graph.centroids, w, h);
  g.validate();
  return g;
}

}  // namespace hact::graph
