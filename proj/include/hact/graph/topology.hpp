#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/entity/superpixel.hpp"
#include "hact/graph/entity_graph.hpp"

namespace hact::graph {

/// Thresholded kNN cell topology. Node v links to u when u is one of v's k
/// nearest nodes (ties by smaller id) and closer than d_min; the graph is the
/// union over both directions.
///
/// Only nodes closer than d_min can qualify, and every node nearer than a
/// qualifying one is itself closer than d_min, so ranking within a d_min grid
/// neighbourhood is exact.
inline EdgeList build_cell_topology(std::span<const Point> centroids, std::size_t k, double d_min) {
  require(k >= 1, Errc::invalid_argument, "k must be >= 1");
  require(d_min > 0.0, Errc::invalid_argument, "d_min must be > 0");
  const std::size_t n = centroids.size();
  if (n < 2) return {};

  auto cell_of = [d_min](double v) { return static_cast<std::int64_t>(std::floor(v / d_min)); };
  auto key = [](std::int64_t cx, std::int64_t cy) {
    return (static_cast<std::uint64_t>(cx) << 32) ^ static_cast<std::uint64_t>(cy & 0xffffffff);
  };
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> grid;
  for (std::uint32_t i = 0; i < n; ++i)
    grid[key(cell_of(centroids[i].x), cell_of(centroids[i].y))].push_back(i);

  const double d2_max = d_min * d_min;
  std::vector<Edge> raw;
  std::vector<std::pair<double, std::uint32_t>> cand;
  for (std::uint32_t v = 0; v < n; ++v) {
    cand.clear();
    const auto cx = cell_of(centroids[v].x), cy = cell_of(centroids[v].y);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        auto it = grid.find(key(cx + dx, cy + dy));
        if (it == grid.end()) continue;
        for (auto u : it->second) {
          if (u == v) continue;
          const double ex = centroids[u].x - centroids[v].x, ey = centroids[u].y - centroids[v].y;
          const double d2 = ex * ex + ey * ey;
          if (d2 < d2_max) cand.emplace_back(d2, u);
        }
      }
    const std::size_t take = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(take), cand.end());
    for (std::size_t i = 0; i < take; ++i) raw.emplace_back(v, cand[i].second);
  }
  return canonical_edges(std::move(raw));
}

/// Region adjacency graph: regions sharing a 4-neighbour pixel boundary.
inline EdgeList build_tissue_topology(const entity::SuperpixelMap& map) {
  const auto adj = entity::region_adjacency(map.labels);
  return EdgeList(adj.begin(), adj.end());
}

}  // namespace hact::graph
