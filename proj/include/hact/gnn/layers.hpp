#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"
#include "hact/gnn/batch.hpp"
#include "hact/nn/mlp.hpp"
#include "hact/nn/norm.hpp"

namespace hact::gnn {

inline constexpr std::size_t kAggregators = 4;  // mean, std, max, min
inline constexpr std::size_t kScalers = 3;      // identity, amplify, attenuate
inline constexpr std::size_t kPnaBlocks = kAggregators * kScalers;
inline constexpr double kStdEps = 1e-8;

struct PnaCache {
  Tensor mean;          // N x d
  Tensor dstd;          // d std / d var, N x d
  std::vector<std::uint32_t> arg_max, arg_min;  // N*d source rows
};

/// Scalers for a node of degree d: identity, log(d+1)/delta, delta/log(d+1).
inline std::array<double, kScalers> pna_scalers(std::size_t degree, double delta) {
  const double l = std::log(static_cast<double>(degree) + 1.0);
  return {1.0, l / delta, delta / l};
}

/// Neighbourhood statistics (mean, std, max, min), each multiplied by the
/// three degree scalers, as 12 blocks of d columns in aggregator-major order.
/// The std is computed as var / sqrt(var + eps): smooth at zero variance, exactly
/// 0 for identical neighbours, and within eps / (2 var) of the plain std otherwise.
/// Isolated nodes get all-zero blocks.
inline Tensor pna_aggregate(const Tensor& h, const LevelBatch& lv, double delta, PnaCache* cache = nullptr) {
  require(delta > 0.0, Errc::degenerate_delta, "PNA delta must be > 0");
  const std::size_t n = lv.node_count(), d = h.cols();
  require(h.rows() == n, Errc::shape_mismatch, "node features do not match the graph");
  Tensor out = Tensor::matrix(n, kPnaBlocks * d);
  PnaCache local;
  PnaCache& c = cache ? *cache : local;
  c.mean = Tensor::matrix(n, d);
  c.dstd = Tensor::matrix(n, d);
  c.arg_max.assign(n * d, 0);
  c.arg_min.assign(n * d, 0);
  std::vector<double> stats(kAggregators * d);
  for (std::size_t v = 0; v < n; ++v) {
    const auto nb = lv.neighbors(v);
    if (nb.empty()) continue;
    const double inv = 1.0 / static_cast<double>(nb.size());
    for (std::size_t k = 0; k < d; ++k) {
      double mu = 0.0, mx = h(nb[0], k), mn = mx;
      std::uint32_t amx = nb[0], amn = nb[0];
      for (const auto u : nb) {
        const double x = h(u, k);
        mu += x;
        if (x > mx) mx = x, amx = u;
        if (x < mn) mn = x, amn = u;
      }
      mu *= inv;
      double var = 0.0;
      for (const auto u : nb) {
        const double e = h(u, k) - mu;
        var += e * e;
      }
      var = mx == mn ? 0.0 : var * inv;
      const double root = std::sqrt(var + kStdEps);
      c.mean(v, k) = mu;
      c.dstd(v, k) = (var + 2.0 * kStdEps) / (2.0 * root * root * root);
      c.arg_max[v * d + k] = amx;
      c.arg_min[v * d + k] = amn;
      stats[k] = mu;
      stats[d + k] = var / root;
      stats[2 * d + k] = mx;
      stats[3 * d + k] = mn;
    }
    const auto s = pna_scalers(nb.size(), delta);
    auto row = out.row(v);
    for (std::size_t a = 0; a < kAggregators; ++a)
      for (std::size_t j = 0; j < kScalers; ++j)
        for (std::size_t k = 0; k < d; ++k) row[(a * kScalers + j) * d + k] = s[j] * stats[a * d + k];
  }
  return out;
}

inline Tensor pna_aggregate(const Tensor& h, const graph::EdgeList& edges, double delta) {
  const auto lv = level_from_edges(h.rows(), edges, Tensor::matrix(h.rows(), 0));
  return pna_aggregate(h, lv, delta);
}

/// Adds the gradient of pna_aggregate w.r.t. h into dh.
inline void pna_aggregate_backward(const Tensor& h, const LevelBatch& lv, double delta, const PnaCache& c,
                                   const Tensor& dout, Tensor& dh) {
  const std::size_t n = lv.node_count(), d = h.cols();
  std::vector<double> g(kAggregators * d);
  for (std::size_t v = 0; v < n; ++v) {
    const auto nb = lv.neighbors(v);
    if (nb.empty()) continue;
    const auto s = pna_scalers(nb.size(), delta);
    const auto row = dout.row(v);
    std::fill(g.begin(), g.end(), 0.0);
    for (std::size_t a = 0; a < kAggregators; ++a)
      for (std::size_t j = 0; j < kScalers; ++j)
        for (std::size_t k = 0; k < d; ++k) g[a * d + k] += s[j] * row[(a * kScalers + j) * d + k];
    const double inv = 1.0 / static_cast<double>(nb.size());
    for (std::size_t k = 0; k < d; ++k) {
      const double gm = g[k] * inv;
      const double gs = 2.0 * g[d + k] * inv * c.dstd(v, k);
      const double mu = c.mean(v, k);
      for (const auto u : nb) dh(u, k) += gm + gs * (h(u, k) - mu);
      dh(c.arg_max[v * d + k], k) += g[2 * d + k];
      dh(c.arg_min[v * d + k], k) += g[3 * d + k];
    }
  }
}

/// (1 + eps) h_v + sum of neighbour features.
inline Tensor gin_aggregate(const Tensor& h, const LevelBatch& lv, double eps) {
  require(h.rows() == lv.node_count(), Errc::shape_mismatch, "node features do not match the graph");
  Tensor out = scaled(h, 1.0 + eps);
  for (std::size_t v = 0; v < lv.node_count(); ++v) {
    auto row = out.row(v);
    for (const auto u : lv.neighbors(v)) {
      const auto src = h.row(u);
      for (std::size_t k = 0; k < row.size(); ++k) row[k] += src[k];
    }
  }
  return out;
}

enum class LayerType { gin, pna };

inline const char* to_string(LayerType t) { return t == LayerType::gin ? "gin" : "pna"; }
inline LayerType parse_layer_type(const std::string& s) {
  if (s == "gin") return LayerType::gin;
  if (s == "pna") return LayerType::pna;
  fail(Errc::invalid_argument, "unknown layer type '" + s + "'");
}

/// One message-passing layer: aggregation, update MLP, optional GraphNorm, BatchNorm.
class GnnLayer {
 public:
  struct Cache {
    Tensor input;
    PnaCache pna;
    nn::Mlp::Cache mlp;
    nn::BatchNorm::Cache bn;
    nn::Mode mode = nn::Mode::train;
  };

  GnnLayer() = default;
  GnnLayer(LayerType type, std::size_t in, std::size_t hidden, std::size_t mlp_layers, bool use_graph_norm, Rng& rng)
      : type_(type), graph_norm_(use_graph_norm), bn_(hidden) {
    require(mlp_layers >= 1, Errc::invalid_argument, "update MLP needs at least one layer");
    std::vector<std::size_t> dims{type == LayerType::pna ? (1 + kPnaBlocks) * in : in};
    for (std::size_t i = 0; i < mlp_layers; ++i) dims.push_back(hidden);
    mlp_ = nn::Mlp(dims, rng);
  }

  LayerType type() const noexcept { return type_; }
  std::size_t in_dim() const noexcept { return type_ == LayerType::pna ? mlp_.in_dim() / (1 + kPnaBlocks) : mlp_.in_dim(); }
  std::size_t out_dim() const noexcept { return mlp_.out_dim(); }
  nn::Mlp& mlp() noexcept { return mlp_; }
  nn::BatchNorm& batch_norm() noexcept { return bn_; }

  double gin_epsilon = 0.0;

  /// Aggregation + update MLP, before any normalisation.
  Tensor pre_norm(const Tensor& h, const LevelBatch& lv, double delta, Cache* cache = nullptr) const {
    if (h.cols() != in_dim())
      fail(Errc::shape_mismatch, std::string(to_string(type_)) + " layer expects " + std::to_string(in_dim()) +
                                     " input features, got " + std::to_string(h.cols()));
    Tensor x = type_ == LayerType::pna ? hconcat(h, pna_aggregate(h, lv, delta, cache ? &cache->pna : nullptr))
                                       : gin_aggregate(h, lv, gin_epsilon);
    return mlp_.forward(x, cache ? &cache->mlp : nullptr);
  }

  Tensor forward(const Tensor& h, const LevelBatch& lv, double delta, nn::Mode mode, Cache* cache = nullptr) {
    Tensor y = pre_norm(h, lv, delta, cache);
    if (graph_norm_) y = nn::graph_norm(y, lv.sizes);
    if (cache) {
      cache->input = h;
      cache->mode = mode;
    }
    return bn_.forward(y, mode, cache ? &cache->bn : nullptr);
  }

  /// Accumulates parameter gradients; returns dL/dh.
  Tensor backward(const Cache& cache, const LevelBatch& lv, double delta, const Tensor& dy) {
    Tensor g = bn_.backward(cache.bn, dy, cache.mode);
    if (graph_norm_) g = nn::graph_norm(g, lv.sizes);
    Tensor dx = mlp_.backward(cache.mlp, g);
    const Tensor& h = cache.input;
    if (type_ == LayerType::gin) return gin_aggregate(dx, lv, gin_epsilon);  // the sum is self-adjoint
    const std::size_t d = h.cols();
    Tensor dh = slice_cols(dx, 0, d);
    pna_aggregate_backward(h, lv, delta, cache.pna, slice_cols(dx, d, kPnaBlocks * d), dh);
    return dh;
  }

  void collect(const std::string& prefix, nn::ParamList& out) {
    mlp_.collect(prefix + ".mlp", out);
    bn_.collect(prefix + ".bn", out);
  }
  void collect_buffers(const std::string& prefix, nn::BufferList& out) { bn_.collect_buffers(prefix + ".bn", out); }

 private:
  LayerType type_ = LayerType::pna;
  bool graph_norm_ = true;
  nn::Mlp mlp_;
  nn::BatchNorm bn_;
};

}  // namespace hact::gnn
