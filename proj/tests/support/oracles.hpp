#pragma once

// Deliberately naive reference implementations used as test oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <set>
#include <utility>
#include <vector>

#include "hact/entity/nuclei.hpp"
#include "hact/io/image.hpp"

namespace hact::testing {

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

/// All-pairs kNN with distance threshold: for every v rank every other node by
/// (distance, id), keep the first k, drop those not closer than d_min.
inline EdgeSet brute_knn_edges(const std::vector<entity::Point>& pts, std::size_t k, double d_min) {
  EdgeSet out;
  const std::size_t n = pts.size();
  for (std::uint32_t v = 0; v < n; ++v) {
    std::vector<std::pair<double, std::uint32_t>> all;
    for (std::uint32_t u = 0; u < n; ++u)
      if (u != v) all.emplace_back(std::hypot(pts[u].x - pts[v].x, pts[u].y - pts[v].y), u);
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < std::min(k, all.size()); ++i)
      if (all[i].first < d_min) out.insert({std::min(v, all[i].second), std::max(v, all[i].second)});
  }
  return out;
}

/// Every ordered pair of pixels at Manhattan distance 1 with different labels.
inline EdgeSet brute_rag(const LabelImage& img) {
  EdgeSet out;
  const auto w = static_cast<long>(img.width), h = static_cast<long>(img.height);
  for (long y = 0; y < h; ++y)
    for (long x = 0; x < w; ++x)
      for (long y2 = 0; y2 < h; ++y2)
        for (long x2 = 0; x2 < w; ++x2) {
          if (std::abs(x - x2) + std::abs(y - y2) != 1) continue;
          const auto a = img.at(static_cast<std::size_t>(x), static_cast<std::size_t>(y));
          const auto b = img.at(static_cast<std::size_t>(x2), static_cast<std::size_t>(y2));
          if (a != b) out.insert({std::min(a, b), std::max(a, b)});
        }
  return out;
}

struct GlcmOracle {
  double dissimilarity, homogeneity, energy, asm_;
};

/// Co-occurrence statistics by enumerating every pixel pair of the patch and
/// testing its displacement against each offset (row, col), symmetric,
/// averaged over the offsets that have at least one pair.
inline GlcmOracle brute_glcm(const std::vector<std::uint8_t>& gray, std::size_t w, std::size_t h, std::size_t levels,
                             const std::vector<std::array<int, 2>>& offsets) {
  GlcmOracle acc{0, 0, 0, 0};
  int used = 0;
  for (const auto& off : offsets) {
    std::vector<std::vector<double>> counts(levels, std::vector<double>(levels, 0.0));
    double total = 0;
    for (std::size_t i = 0; i < gray.size(); ++i)
      for (std::size_t j = 0; j < gray.size(); ++j) {
        const long dr = static_cast<long>(j / w) - static_cast<long>(i / w);
        const long dc = static_cast<long>(j % w) - static_cast<long>(i % w);
        if (dr != off[0] || dc != off[1]) continue;
        const std::size_t a = gray[i] * levels / 256, b = gray[j] * levels / 256;
        counts[a][b] += 1;
        counts[b][a] += 1;
        total += 2;
      }
    if (total == 0) continue;
    ++used;
    double dis = 0, hom = 0, s = 0;
    for (std::size_t a = 0; a < levels; ++a)
      for (std::size_t b = 0; b < levels; ++b) {
        const double p = counts[a][b] / total;
        const double d = static_cast<double>(a) - static_cast<double>(b);
        dis += p * std::abs(d);
        hom += p / (1 + d * d);
        s += p * p;
      }
    acc.dissimilarity += dis;
    acc.homogeneity += hom;
    acc.asm_ += s;
    acc.energy += std::sqrt(s);
  }
  (void)h;
  if (used == 0) return {0, 1, 1, 1};
  return {acc.dissimilarity / used, acc.homogeneity / used, acc.energy / used, acc.asm_ / used};
}

/// Weighted F1 straight from the definition, one class at a time.
inline double brute_weighted_f1(const std::vector<std::vector<std::uint64_t>>& cm) {
  const std::size_t c = cm.size();
  double n = 0;
  for (const auto& row : cm)
    for (auto v : row) n += static_cast<double>(v);
  double out = 0;
  for (std::size_t k = 0; k < c; ++k) {
    double tp = static_cast<double>(cm[k][k]), fp = 0, fn = 0;
    for (std::size_t j = 0; j < c; ++j) {
      if (j == k) continue;
      fp += static_cast<double>(cm[j][k]);
      fn += static_cast<double>(cm[k][j]);
    }
    const double f1 = tp == 0 ? 0.0 : 2 * tp / (2 * tp + fp + fn);
    out += (tp + fn) / n * f1;
  }
  return out;
}

}  // namespace hact::testing
