#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/entity/nuclei.hpp"
#include "hact/io/image.hpp"
#include "hact/io/png.hpp"

namespace hact::entity {

/// Partition of an image into 4-connected regions labelled 0..region_count-1.
struct SuperpixelMap {
  LabelImage labels;
  std::uint32_t region_count = 0;

  std::size_t width() const noexcept { return labels.width; }
  std::size_t height() const noexcept { return labels.height; }
  std::uint32_t at(std::size_t x, std::size_t y) const noexcept { return labels.at(x, y); }

  /// Throws unless ids are exactly 0..region_count-1, each non-empty and 4-connected.
  void validate() const {
    require(labels.labels.size() == labels.width * labels.height && !labels.labels.empty(),
            Errc::shape_mismatch, "superpixel map has inconsistent dimensions");
    std::vector<std::size_t> hist(region_count, 0);
    for (auto l : labels.labels) {
      require(l < region_count, Errc::invalid_argument,
              "label " + std::to_string(l) + " >= region_count " + std::to_string(region_count));
      ++hist[l];
    }
    for (std::uint32_t r = 0; r < region_count; ++r)
      require(hist[r] > 0, Errc::invalid_argument, "region " + std::to_string(r) + " is empty");
    std::vector<std::uint8_t> seen(labels.labels.size(), 0);
    std::vector<std::uint8_t> visited_label(region_count, 0);
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < labels.labels.size(); ++s) {
      if (seen[s]) continue;
      const auto l = labels.labels[s];
      require(!visited_label[l], Errc::invalid_argument,
              "region " + std::to_string(l) + " is not 4-connected");
      visited_label[l] = 1;
      seen[s] = 1;
      stack.assign(1, s);
      while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        const std::size_t x = i % labels.width, y = i / labels.width;
        auto go = [&](std::size_t j) {
          if (!seen[j] && labels.labels[j] == l) {
            seen[j] = 1;
            stack.push_back(j);
          }
        };
        if (x > 0) go(i - 1);
        if (x + 1 < labels.width) go(i + 1);
        if (y > 0) go(i - labels.width);
        if (y + 1 < labels.height) go(i + labels.width);
      }
    }
  }

  friend bool operator==(const SuperpixelMap&, const SuperpixelMap&) = default;
};

namespace detail {

inline std::array<double, 3> srgb_to_lab(double r8, double g8, double b8) {
  auto lin = [](double c) {
    c /= 255.0;
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
  };
  const double r = lin(r8), g = lin(g8), b = lin(b8);
  const double x = (0.4124564 * r + 0.3575761 * g + 0.1804375 * b) / 0.95047;
  const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
  const double z = (0.0193339 * r + 0.1191920 * g + 0.9503041 * b) / 1.08883;
  auto f = [](double t) { return t > 216.0 / 24389.0 ? std::cbrt(t) : (24389.0 / 27.0 * t + 16.0) / 116.0; };
  const double fx = f(x), fy = f(y), fz = f(z);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

/// Relabels to 0..n-1 in raster order of first appearance.
inline std::uint32_t relabel_by_first_appearance(LabelImage& img) {
  std::map<std::uint32_t, std::uint32_t> remap;
  for (auto& l : img.labels) {
    auto [it, inserted] = remap.try_emplace(l, static_cast<std::uint32_t>(remap.size()));
    l = it->second;
  }
  return static_cast<std::uint32_t>(remap.size());
}

struct DisjointSet {
  std::vector<std::uint32_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0u); }
  std::uint32_t find(std::uint32_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
};

/// Makes every label 4-connected: each label keeps its largest component and
/// every other fragment is absorbed by the neighbouring region it shares the
/// longest boundary with.
inline void enforce_connectivity(LabelImage& img) {
  // Components of equal-label pixels.
  LabelImage comp(img.width, img.height, 0);
  std::uint32_t ncomp = 0;
  {
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < img.labels.size(); ++s) {
      if (comp.labels[s]) continue;
      ++ncomp;
      comp.labels[s] = ncomp;
      stack.assign(1, s);
      const auto l = img.labels[s];
      while (!stack.empty()) {
        const auto i = stack.back();
        stack.pop_back();
        const std::size_t x = i % img.width, y = i / img.width;
        auto go = [&](std::size_t j) {
          if (!comp.labels[j] && img.labels[j] == l) {
            comp.labels[j] = ncomp;
            stack.push_back(j);
          }
        };
        if (x > 0) go(i - 1);
        if (x + 1 < img.width) go(i + 1);
        if (y > 0) go(i - img.width);
        if (y + 1 < img.height) go(i + img.width);
      }
    }
  }
  // comp ids are 1-based and numbered in raster order of first pixel.
  std::vector<std::size_t> size(ncomp + 1, 0);
  std::vector<std::uint32_t> comp_label(ncomp + 1, 0);
  for (std::size_t i = 0; i < img.labels.size(); ++i) {
    ++size[comp.labels[i]];
    comp_label[comp.labels[i]] = img.labels[i];
  }
  std::map<std::uint32_t, std::uint32_t> main_of;  // label -> main component
  for (std::uint32_t c = 1; c <= ncomp; ++c) {
    auto [it, inserted] = main_of.try_emplace(comp_label[c], c);
    if (!inserted && size[c] > size[it->second]) it->second = c;
  }
  std::vector<std::uint8_t> is_main(ncomp + 1, 0);
  for (const auto& [l, c] : main_of) is_main[c] = 1;
  if (main_of.size() == ncomp) return;

  std::map<std::pair<std::uint32_t, std::uint32_t>, std::size_t> shared;
  for (std::size_t y = 0; y < img.height; ++y)
    for (std::size_t x = 0; x < img.width; ++x) {
      const auto a = comp.at(x, y);
      if (x + 1 < img.width && comp.at(x + 1, y) != a) {
        const auto b = comp.at(x + 1, y);
        ++shared[{std::min(a, b), std::max(a, b)}];
      }
      if (y + 1 < img.height && comp.at(x, y + 1) != a) {
        const auto b = comp.at(x, y + 1);
        ++shared[{std::min(a, b), std::max(a, b)}];
      }
    }

  DisjointSet dsu(ncomp + 1);
  for (std::uint32_t o = 1; o <= ncomp; ++o) {
    if (is_main[o]) continue;
    const auto g = dsu.find(o);
    std::map<std::uint32_t, std::size_t> votes;
    for (const auto& [edge, n] : shared) {
      const auto ga = dsu.find(edge.first), gb = dsu.find(edge.second);
      if (ga == g && gb != g) votes[gb] += n;
      else if (gb == g && ga != g) votes[ga] += n;
    }
    if (votes.empty()) continue;
    auto best = votes.begin();
    for (auto it = votes.begin(); it != votes.end(); ++it)
      if (it->second > best->second) best = it;  // ties keep the smaller root id
    dsu.parent[g] = best->first;
  }
  std::vector<std::uint32_t> group_label(ncomp + 1, 0);
  for (std::uint32_t c = 1; c <= ncomp; ++c)
    if (is_main[c]) group_label[dsu.find(c)] = comp_label[c];
  for (std::size_t i = 0; i < img.labels.size(); ++i)
    img.labels[i] = group_label[dsu.find(comp.labels[i])];
}

}  // namespace detail

struct SlicOptions {
  std::size_t n_segments = 100;
  double compactness = 10.0;
  std::size_t iterations = 10;
  bool downsample = true;  // run at half resolution, upsample labels
};

/// SLIC superpixels: localized k-means over (CIELAB color, position) with
/// seeds on a regular grid, followed by a connectivity repair pass.
inline SuperpixelMap slic_superpixels(const RgbImage& image, const SlicOptions& opt = {}) {
  image.validate();
  require(opt.n_segments >= 1, Errc::invalid_argument, "n_segments must be >= 1");
  require(opt.iterations >= 1, Errc::invalid_argument, "iterations must be >= 1");
  require(opt.n_segments <= image.pixel_count(), Errc::invalid_argument,
          "n_segments " + std::to_string(opt.n_segments) + " exceeds pixel count " +
              std::to_string(image.pixel_count()));

  // Working resolution: 2x2 block average when that still leaves room for the seeds.
  const bool half = opt.downsample && image.width >= 2 && image.height >= 2 &&
                    ((image.width + 1) / 2) * ((image.height + 1) / 2) >= opt.n_segments;
  const std::size_t w = half ? (image.width + 1) / 2 : image.width;
  const std::size_t h = half ? (image.height + 1) / 2 : image.height;
  std::vector<std::array<double, 3>> lab(w * h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      std::array<double, 3> rgb{0, 0, 0};
      int n = 0;
      const std::size_t f = half ? 2 : 1;
      for (std::size_t dy = 0; dy < f; ++dy)
        for (std::size_t dx = 0; dx < f; ++dx) {
          const std::size_t sx = x * f + dx, sy = y * f + dy;
          if (sx >= image.width || sy >= image.height) continue;
          const auto* p = image.pixel(sx, sy);
          for (int c = 0; c < 3; ++c) rgb[c] += p[c];
          ++n;
        }
      lab[y * w + x] = detail::srgb_to_lab(rgb[0] / n, rgb[1] / n, rgb[2] / n);
    }

  // Grid of roughly n_segments seeds matching the image aspect ratio.
  const double k = static_cast<double>(opt.n_segments);
  const auto ny = static_cast<std::size_t>(
      std::clamp(std::round(std::sqrt(k * static_cast<double>(h) / static_cast<double>(w))), 1.0,
                 std::min(k, static_cast<double>(h))));
  const auto nx = static_cast<std::size_t>(
      std::clamp(std::round(k / static_cast<double>(ny)), 1.0, static_cast<double>(w)));
  const double step_x = static_cast<double>(w) / static_cast<double>(nx);
  const double step_y = static_cast<double>(h) / static_cast<double>(ny);
  const double S = std::sqrt(static_cast<double>(w * h) / static_cast<double>(nx * ny));

  struct Center {
    double l, a, b, x, y;
  };
  std::vector<Center> centers;
  centers.reserve(nx * ny);
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) {
      const double cx = (static_cast<double>(i) + 0.5) * step_x;
      const double cy = (static_cast<double>(j) + 0.5) * step_y;
      const auto px = std::min(w - 1, static_cast<std::size_t>(cx));
      const auto py = std::min(h - 1, static_cast<std::size_t>(cy));
      const auto& c = lab[py * w + px];
      centers.push_back({c[0], c[1], c[2], cx, cy});
    }

  LabelImage labels(w, h, 0);
  // Initial assignment: grid cell containing the pixel.
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      const auto gi = std::min(nx - 1, static_cast<std::size_t>((static_cast<double>(x) + 0.5) / step_x));
      const auto gj = std::min(ny - 1, static_cast<std::size_t>((static_cast<double>(y) + 0.5) / step_y));
      labels.at(x, y) = static_cast<std::uint32_t>(gj * nx + gi);
    }

  const double spatial_w = (opt.compactness / S) * (opt.compactness / S);
  const double window = std::max(step_x, step_y);
  std::vector<double> best(w * h);
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto& ctr = centers[c];
      const auto x0 = static_cast<std::size_t>(std::max(0.0, std::floor(ctr.x - window)));
      const auto x1 = static_cast<std::size_t>(std::min(static_cast<double>(w), std::ceil(ctr.x + window)));
      const auto y0 = static_cast<std::size_t>(std::max(0.0, std::floor(ctr.y - window)));
      const auto y1 = static_cast<std::size_t>(std::min(static_cast<double>(h), std::ceil(ctr.y + window)));
      for (std::size_t y = y0; y < y1; ++y)
        for (std::size_t x = x0; x < x1; ++x) {
          const auto& p = lab[y * w + x];
          const double dl = p[0] - ctr.l, da = p[1] - ctr.a, db = p[2] - ctr.b;
          const double dx = static_cast<double>(x) + 0.5 - ctr.x, dy = static_cast<double>(y) + 0.5 - ctr.y;
          const double d = dl * dl + da * da + db * db + spatial_w * (dx * dx + dy * dy);
          if (d < best[y * w + x]) {
            best[y * w + x] = d;
            labels.at(x, y) = static_cast<std::uint32_t>(c);
          }
        }
    }
    std::vector<std::array<double, 6>> acc(centers.size(), {0, 0, 0, 0, 0, 0});
    for (std::size_t y = 0; y < h; ++y)
      for (std::size_t x = 0; x < w; ++x) {
        auto& a = acc[labels.at(x, y)];
        const auto& p = lab[y * w + x];
        a[0] += p[0];
        a[1] += p[1];
        a[2] += p[2];
        a[3] += static_cast<double>(x) + 0.5;
        a[4] += static_cast<double>(y) + 0.5;
        a[5] += 1.0;
      }
    for (std::size_t c = 0; c < centers.size(); ++c) {
      const auto& a = acc[c];
      if (a[5] == 0.0) continue;
      centers[c] = {a[0] / a[5], a[1] / a[5], a[2] / a[5], a[3] / a[5], a[4] / a[5]};
    }
  }

  detail::enforce_connectivity(labels);

  SuperpixelMap out;
  if (half) {
    out.labels = LabelImage(image.width, image.height, 0);
    for (std::size_t y = 0; y < image.height; ++y)
      for (std::size_t x = 0; x < image.width; ++x) out.labels.at(x, y) = labels.at(x / 2, y / 2);
  } else {
    out.labels = std::move(labels);
  }
  out.region_count = detail::relabel_by_first_appearance(out.labels);
  return out;
}

/// Per-channel RGB mean and standard deviation on the unit scale.
using ColorDescriptor = std::array<double, 6>;

namespace detail {
struct ColorStats {
  double n = 0;
  std::array<double, 3> sum{0, 0, 0};
  std::array<double, 3> sumsq{0, 0, 0};

  void absorb(const ColorStats& o) {
    n += o.n;
    for (int c = 0; c < 3; ++c) {
      sum[c] += o.sum[c];
      sumsq[c] += o.sumsq[c];
    }
  }
  ColorDescriptor descriptor() const {
    ColorDescriptor d{};
    for (int c = 0; c < 3; ++c) {
      const double mean = sum[c] / n;
      d[c] = mean;
      d[3 + c] = std::sqrt(std::max(0.0, sumsq[c] / n - mean * mean));
    }
    return d;
  }
};

inline double descriptor_distance(const ColorDescriptor& a, const ColorDescriptor& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}
}  // namespace detail

inline std::vector<ColorDescriptor> region_color_descriptors(const RgbImage& image, const SuperpixelMap& map) {
  std::vector<detail::ColorStats> st(map.region_count);
  for (std::size_t i = 0; i < map.labels.labels.size(); ++i) {
    auto& s = st[map.labels.labels[i]];
    s.n += 1;
    for (int c = 0; c < 3; ++c) {
      const double v = image.data[i * 3 + c] / 255.0;
      s.sum[c] += v;
      s.sumsq[c] += v * v;
    }
  }
  std::vector<ColorDescriptor> out;
  out.reserve(st.size());
  for (const auto& s : st) out.push_back(s.descriptor());
  return out;
}

/// Unordered region adjacency (4-neighbourhood), pairs with first < second.
inline std::set<std::pair<std::uint32_t, std::uint32_t>> region_adjacency(const LabelImage& labels) {
  std::set<std::pair<std::uint32_t, std::uint32_t>> adj;
  for (std::size_t y = 0; y < labels.height; ++y)
    for (std::size_t x = 0; x < labels.width; ++x) {
      const auto a = labels.at(x, y);
      if (x + 1 < labels.width && labels.at(x + 1, y) != a)
        adj.insert({std::min(a, labels.at(x + 1, y)), std::max(a, labels.at(x + 1, y))});
      if (y + 1 < labels.height && labels.at(x, y + 1) != a)
        adj.insert({std::min(a, labels.at(x, y + 1)), std::max(a, labels.at(x, y + 1))});
    }
  return adj;
}

/// Greedy best-pair-first merging of adjacent regions whose 6-dim color
/// descriptors are closer than `similarity_threshold`. Ties go to the
/// lexicographically smallest id pair; the merged region keeps the smaller id.
inline SuperpixelMap merge_superpixels(const RgbImage& image, const SuperpixelMap& map,
                                       double similarity_threshold = 0.08) {
  map.validate();
  require(image.width == map.width() && image.height == map.height(), Errc::shape_mismatch,
          "image and superpixel map dimensions differ");

  std::vector<detail::ColorStats> stats(map.region_count);
  for (std::size_t i = 0; i < map.labels.labels.size(); ++i) {
    auto& s = stats[map.labels.labels[i]];
    s.n += 1;
    for (int c = 0; c < 3; ++c) {
      const double v = image.data[i * 3 + c] / 255.0;
      s.sum[c] += v;
      s.sumsq[c] += v * v;
    }
  }
  std::vector<ColorDescriptor> desc(map.region_count);
  for (std::uint32_t r = 0; r < map.region_count; ++r) desc[r] = stats[r].descriptor();

  auto adj = region_adjacency(map.labels);
  detail::DisjointSet owner(map.region_count);
  while (true) {
    double best = std::numeric_limits<double>::infinity();
    std::pair<std::uint32_t, std::uint32_t> pick{0, 0};
    for (const auto& e : adj) {
      const double d = detail::descriptor_distance(desc[e.first], desc[e.second]);
      if (d < best) {  // set order gives the (min, min) tie-break
        best = d;
        pick = e;
      }
    }
    if (!(best < similarity_threshold)) break;
    const auto [keep, gone] = pick;
    stats[keep].absorb(stats[gone]);
    desc[keep] = stats[keep].descriptor();
    owner.parent[gone] = keep;
    std::set<std::pair<std::uint32_t, std::uint32_t>> next;
    for (const auto& [a, b] : adj) {
      const auto na = a == gone ? keep : a;
      const auto nb = b == gone ? keep : b;
      if (na != nb) next.insert({std::min(na, nb), std::max(na, nb)});
    }
    adj = std::move(next);
  }

  std::vector<std::uint32_t> root(map.region_count);
  for (std::uint32_t r = 0; r < map.region_count; ++r) root[r] = owner.find(r);
  std::vector<std::uint32_t> rank(map.region_count, 0);
  std::uint32_t count = 0;
  for (std::uint32_t r = 0; r < map.region_count; ++r)
    if (root[r] == r) rank[r] = count++;
  SuperpixelMap out;
  out.labels = LabelImage(map.width(), map.height(), 0);
  for (std::size_t i = 0; i < out.labels.labels.size(); ++i)
    out.labels.labels[i] = rank[root[map.labels.labels[i]]];
  out.region_count = count;
  return out;
}

/// For each coarse region, the ids of the fine regions it is made of. Each
/// fine region must lie entirely inside one coarse region.
inline std::vector<std::vector<std::uint32_t>> region_membership(const SuperpixelMap& fine,
                                                                 const SuperpixelMap& coarse) {
  require(fine.width() == coarse.width() && fine.height() == coarse.height(), Errc::shape_mismatch,
          "membership: map dimensions differ");
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> parent(fine.region_count, unset);
  for (std::size_t i = 0; i < fine.labels.labels.size(); ++i) {
    auto& p = parent[fine.labels.labels[i]];
    const auto c = coarse.labels.labels[i];
    if (p == unset) p = c;
    else require(p == c, Errc::invalid_argument, "fine region straddles coarse regions");
  }
  std::vector<std::vector<std::uint32_t>> out(coarse.region_count);
  for (std::uint32_t f = 0; f < fine.region_count; ++f) out[parent[f]].push_back(f);
  return out;
}

inline void save_superpixel_map(const SuperpixelMap& map, const std::string& png_path) {
  png::write_labels16(png_path, map.labels);
  std::ofstream sidecar(png_path + ".json");
  if (!sidecar) fail(Errc::io_error, "cannot write " + png_path + ".json");
  sidecar << nlohmann::json{{"region_count", map.region_count},
                            {"width", map.width()},
                            {"height", map.height()}}
                 .dump(2)
          << "\n";
}

inline SuperpixelMap load_superpixel_map(const std::string& png_path) {
  SuperpixelMap map;
  map.labels = png::read_labels16(png_path);
  std::ifstream sidecar(png_path + ".json");
  if (!sidecar) fail(Errc::io_error, "missing sidecar " + png_path + ".json");
  nlohmann::json j;
  sidecar >> j;
  map.region_count = j.at("region_count").get<std::uint32_t>();
  map.validate();
  return map;
}

}  // namespace hact::entity
