#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/graph/entity_graph.hpp"

namespace hact::gnn {

/// Disjoint union of the graphs of one level (cells or tissue) in a
/// mini-batch. Graph g owns rows [offsets[g], offsets[g+1]); adjacency is
/// stored as sorted neighbour lists in CSR form.
struct LevelBatch {
  std::vector<std::size_t> sizes;
  std::vector<std::size_t> offsets{0};
  std::vector<std::size_t> nbr_start{0};
  std::vector<std::uint32_t> nbr;
  Tensor features;

  std::size_t node_count() const noexcept { return nbr_start.size() - 1; }
  std::size_t graph_count() const noexcept { return sizes.size(); }
  std::size_t degree(std::size_t v) const noexcept { return nbr_start[v + 1] - nbr_start[v]; }
  std::span<const std::uint32_t> neighbors(std::size_t v) const noexcept {
    return {nbr.data() + nbr_start[v], degree(v)};
  }
};

namespace detail {

inline void append_graph(LevelBatch& lv, std::size_t n, const graph::EdgeList& edges) {
  const std::size_t base = lv.offsets.back();
  std::vector<std::vector<std::uint32_t>> adj(n);
  for (const auto& [a, b] : edges) {
    require(a < n && b < n, Errc::out_of_bounds, "edge endpoint out of range");
    adj[a].push_back(static_cast<std::uint32_t>(base + b));
    adj[b].push_back(static_cast<std::uint32_t>(base + a));
  }
  for (auto& l : adj) {
    std::sort(l.begin(), l.end());
    lv.nbr.insert(lv.nbr.end(), l.begin(), l.end());
    lv.nbr_start.push_back(lv.nbr.size());
  }
  lv.sizes.push_back(n);
  lv.offsets.push_back(base + n);
}

inline Tensor stack_rows(std::span<const Tensor* const> parts, std::size_t cols) {
  std::size_t rows = 0;
  for (const Tensor* t : parts) rows += t->rows();
  std::vector<double> vals;
  vals.reserve(rows * cols);
  for (const Tensor* t : parts) {
    if (t->rows() == 0) continue;
    if (t->cols() != cols)
      fail(Errc::shape_mismatch, "node features have " + std::to_string(t->cols()) + " columns, expected " +
                                     std::to_string(cols));
    vals.insert(vals.end(), t->storage().begin(), t->storage().end());
  }
  return Tensor({rows, cols}, std::move(vals));
}

}  // namespace detail

/// Single graph given as node count + edges, with the supplied features.
inline LevelBatch level_from_edges(std::size_t n, const graph::EdgeList& edges, Tensor features) {
  require(features.rows() == n, Errc::shape_mismatch, "feature rows differ from node count");
  LevelBatch lv;
  detail::append_graph(lv, n, edges);
  lv.features = std::move(features);
  return lv;
}

inline LevelBatch make_level(std::span<const graph::EntityGraph* const> graphs) {
  LevelBatch lv;
  std::vector<const Tensor*> feats;
  std::size_t cols = 0;
  bool have_cols = false;
  for (const auto* g : graphs) {
    detail::append_graph(lv, g->node_count, g->edges);
    feats.push_back(&g->features);
    if (!have_cols && g->node_count > 0) {
      cols = g->features.cols();
      have_cols = true;
    }
  }
  lv.features = detail::stack_rows(feats, cols);
  return lv;
}

/// Marks a cell that feeds no tissue node (used to switch the hand-off off).
inline constexpr std::uint32_t kNoRegion = std::numeric_limits<std::uint32_t>::max();

struct HactBatch {
  LevelBatch cells;
  LevelBatch tissue;
  std::vector<std::uint32_t> cell_region;  // batch-global tissue row per cell, or kNoRegion

  std::size_t graph_count() const noexcept { return cells.graph_count(); }
};

inline HactBatch make_batch(std::span<const graph::HactGraph* const> graphs) {
  require(!graphs.empty(), Errc::invalid_argument, "empty batch");
  std::vector<const graph::EntityGraph*> cg, tg;
  for (const auto* g : graphs) {
    cg.push_back(&g->cell_graph);
    tg.push_back(&g->tissue_graph);
  }
  HactBatch b;
  b.cells = make_level(cg);
  b.tissue = make_level(tg);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto* g = graphs[i];
    require(g->cell_region.size() == g->cell_graph.node_count, Errc::shape_mismatch,
            "assignment must have one row per cell");
    for (const auto r : g->cell_region) {
      require(r < g->tissue_graph.node_count, Errc::out_of_bounds, "cell assigned to a missing tissue region");
      b.cell_region.push_back(static_cast<std::uint32_t>(b.tissue.offsets[i] + r));
    }
  }
  return b;
}

inline HactBatch make_batch(const graph::HactGraph& g) {
  const graph::HactGraph* one[] = {&g};
  return make_batch(one);
}

}  // namespace hact::gnn
