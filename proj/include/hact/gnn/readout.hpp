#pragma once

#include <span>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"
#include "hact/gnn/batch.hpp"
#include "hact/nn/lstm.hpp"

namespace hact::gnn {

enum class JkMode { none, concat, lstm };

inline const char* to_string(JkMode m) {
  switch (m) {
    case JkMode::none: return "none";
    case JkMode::concat: return "concat";
    case JkMode::lstm: return "lstm";
  }
  return "?";
}
inline JkMode parse_jk_mode(const std::string& s) {
  if (s == "none") return JkMode::none;
  if (s == "concat") return JkMode::concat;
  if (s == "lstm") return JkMode::lstm;
  fail(Errc::invalid_argument, "unknown jumping-knowledge mode '" + s + "'");
}

/// Combines the per-layer node embeddings of one GNN into its output.
/// The LSTM variant runs over the layers in order and keeps the final hidden state.
class JumpingKnowledge {
 public:
  struct Cache {
    nn::Lstm::Cache lstm;
  };

  JumpingKnowledge() = default;
  JumpingKnowledge(JkMode mode, std::size_t layers, std::size_t dim, Rng& rng)
      : mode_(mode), layers_(layers), dim_(dim) {
    if (mode == JkMode::lstm) lstm_ = nn::Lstm(dim, dim, rng);
  }

  JkMode mode() const noexcept { return mode_; }
  std::size_t out_dim() const noexcept { return mode_ == JkMode::concat ? layers_ * dim_ : dim_; }

  Tensor forward(std::span<const Tensor> per_layer, Cache* cache = nullptr) const {
    require(!per_layer.empty(), Errc::invalid_argument, "jumping knowledge needs at least one layer output");
    for (const auto& t : per_layer)
      if (t.rows() != per_layer.front().rows())
        fail(Errc::shape_mismatch, "jumping knowledge: layer outputs have different node counts (" +
                                       std::to_string(t.rows()) + " vs " + std::to_string(per_layer.front().rows()) + ")");
    switch (mode_) {
      case JkMode::none: return per_layer.back();
      case JkMode::concat: {
        std::vector<const Tensor*> parts;
        for (const auto& t : per_layer) parts.push_back(&t);
        return hconcat(parts);
      }
      case JkMode::lstm: return lstm_.forward(per_layer, cache ? &cache->lstm : nullptr);
    }
    return {};
  }

  /// Gradient for every per-layer input.
  std::vector<Tensor> backward(const Cache& cache, const Tensor& dy, std::span<const Tensor> per_layer) {
    std::vector<Tensor> out(per_layer.size());
    switch (mode_) {
      case JkMode::none:
        for (std::size_t t = 0; t + 1 < per_layer.size(); ++t) out[t] = Tensor(per_layer[t].shape());
        out.back() = dy;
        break;
      case JkMode::concat: {
        std::size_t off = 0;
        for (std::size_t t = 0; t < per_layer.size(); ++t) {
          out[t] = slice_cols(dy, off, per_layer[t].cols());
          off += per_layer[t].cols();
        }
        break;
      }
      case JkMode::lstm: out = lstm_.backward(cache.lstm, dy); break;
    }
    return out;
  }

  void collect(const std::string& prefix, nn::ParamList& out) {
    if (mode_ == JkMode::lstm) lstm_.collect(prefix + ".lstm", out);
  }

 private:
  JkMode mode_ = JkMode::none;
  std::size_t layers_ = 0;
  std::size_t dim_ = 0;
  nn::Lstm lstm_;
};

/// Tissue-level input: each region's own features followed by the sum of the
/// embeddings of the cells assigned to it (A^T X for the binary assignment A).
inline Tensor tissue_init(const Tensor& h_tissue, const Tensor& cell_jk, const Tensor& assignment) {
  check_shape(assignment, cell_jk.rows(), h_tissue.rows(), "assignment matrix");
  for (const double a : assignment.values())
    require(a == 0.0 || a == 1.0, Errc::invalid_argument, "assignment matrix must be binary");
  return hconcat(h_tissue, matmul_tn(assignment, cell_jk));
}

/// Batched form with the assignment given as a tissue row per cell (kNoRegion = unassigned).
inline Tensor scatter_cells(const Tensor& cell_jk, std::span<const std::uint32_t> cell_region, std::size_t regions) {
  require(cell_region.size() == cell_jk.rows(), Errc::shape_mismatch, "assignment must have one entry per cell");
  Tensor out = Tensor::matrix(regions, cell_jk.cols());
  for (std::size_t v = 0; v < cell_region.size(); ++v) {
    if (cell_region[v] == kNoRegion) continue;
    require(cell_region[v] < regions, Errc::out_of_bounds, "cell assigned to a missing tissue region");
    auto dst = out.row(cell_region[v]);
    const auto src = cell_jk.row(v);
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
  }
  return out;
}

/// Adjoint of scatter_cells: every cell receives its region's gradient row.
inline Tensor gather_cells(const Tensor& d_regions, std::span<const std::uint32_t> cell_region) {
  Tensor out = Tensor::matrix(cell_region.size(), d_regions.cols());
  for (std::size_t v = 0; v < cell_region.size(); ++v) {
    if (cell_region[v] == kNoRegion) continue;
    const auto src = d_regions.row(cell_region[v]);
    std::copy(src.begin(), src.end(), out.row(v).begin());
  }
  return out;
}

/// Column sum of a single graph's node embeddings.
inline Tensor readout_sum(const Tensor& h) {
  require(h.rows() >= 1, Errc::invalid_argument, "readout of an empty graph");
  Tensor out = Tensor::vector(h.cols());
  for (std::size_t r = 0; r < h.rows(); ++r)
    for (std::size_t c = 0; c < h.cols(); ++c) out[c] += h(r, c);
  return out;
}

/// Per-graph column sums of a batch: B x d.
inline Tensor readout_sum(const Tensor& h, const LevelBatch& lv) {
  Tensor out = Tensor::matrix(lv.graph_count(), h.cols());
  for (std::size_t g = 0; g < lv.graph_count(); ++g) {
    auto dst = out.row(g);
    for (std::size_t r = lv.offsets[g]; r < lv.offsets[g + 1]; ++r) {
      const auto src = h.row(r);
      for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
    }
  }
  return out;
}

inline Tensor readout_sum_backward(const Tensor& d_graph, const LevelBatch& lv) {
  Tensor out = Tensor::matrix(lv.node_count(), d_graph.cols());
  for (std::size_t g = 0; g < lv.graph_count(); ++g) {
    const auto src = d_graph.row(g);
    for (std::size_t r = lv.offsets[g]; r < lv.offsets[g + 1]; ++r) std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

}  // namespace hact::gnn
