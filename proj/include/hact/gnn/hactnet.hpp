#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"
#include "hact/gnn/batch.hpp"
#include "hact/gnn/delta.hpp"
#include "hact/gnn/layers.hpp"
#include "hact/gnn/readout.hpp"
#include "hact/nn/adam.hpp"
#include "hact/nn/loss.hpp"
#include "hact/nn/mlp.hpp"

namespace hact::gnn {

/// hact: cell GNN feeding the tissue GNN. cg_only / tg_only: a single level.
/// concat: both levels run independently and their readouts are concatenated.
enum class ModelKind { hact, cg_only, tg_only, concat };

inline const char* to_string(ModelKind k) {
  switch (k) {
    case ModelKind::hact: return "hact";
    case ModelKind::cg_only: return "cg";
    case ModelKind::tg_only: return "tg";
    case ModelKind::concat: return "concat";
  }
  return "?";
}
inline ModelKind parse_model_kind(const std::string& s) {
  if (s == "hact") return ModelKind::hact;
  if (s == "cg" || s == "cg_only") return ModelKind::cg_only;
  if (s == "tg" || s == "tg_only") return ModelKind::tg_only;
  if (s == "concat") return ModelKind::concat;
  fail(Errc::invalid_argument, "unknown model kind '" + s + "'");
}

struct HactNetConfig {
  ModelKind kind = ModelKind::hact;
  LayerType layer_type = LayerType::pna;
  JkMode jk = JkMode::lstm;
  std::size_t cell_feature_dim = 0;
  std::size_t tissue_feature_dim = 0;
  std::size_t num_classes = 2;
  std::size_t cell_layers = 3;
  std::size_t tissue_layers = 3;
  std::size_t hidden_dim = 64;
  std::size_t mlp_layers = 2;
  std::size_t embedding_dim = 128;
  std::size_t classifier_hidden = 128;
  bool graph_norm = true;

  bool uses_cells() const noexcept { return kind != ModelKind::tg_only; }
  bool uses_tissue() const noexcept { return kind != ModelKind::cg_only; }

  void validate() const {
    require(num_classes >= 2, Errc::invalid_argument, "need at least 2 classes");
    require(hidden_dim >= 1 && mlp_layers >= 1 && embedding_dim >= 1 && classifier_hidden >= 1,
            Errc::invalid_argument, "layer widths must be positive");
    if (uses_cells()) {
      require(cell_layers >= 1, Errc::invalid_argument, "cell GNN needs at least one layer");
      require(cell_feature_dim >= 1, Errc::invalid_argument, "cell feature dimension must be positive");
    }
    if (uses_tissue()) {
      require(tissue_layers >= 1, Errc::invalid_argument, "tissue GNN needs at least one layer");
      require(tissue_feature_dim >= 1, Errc::invalid_argument, "tissue feature dimension must be positive");
    }
  }
};

inline nlohmann::json to_json(const HactNetConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"layer_type", to_string(c.layer_type)},
          {"jk", to_string(c.jk)},
          {"cell_feature_dim", c.cell_feature_dim},
          {"tissue_feature_dim", c.tissue_feature_dim},
          {"num_classes", c.num_classes},
          {"cell_layers", c.cell_layers},
          {"tissue_layers", c.tissue_layers},
          {"hidden_dim", c.hidden_dim},
          {"mlp_layers", c.mlp_layers},
          {"embedding_dim", c.embedding_dim},
          {"classifier_hidden", c.classifier_hidden},
          {"graph_norm", c.graph_norm}};
}

inline HactNetConfig config_from_json(const nlohmann::json& j) {
  HactNetConfig c;
  c.kind = parse_model_kind(j.at("kind").get<std::string>());
  c.layer_type = parse_layer_type(j.at("layer_type").get<std::string>());
  c.jk = parse_jk_mode(j.at("jk").get<std::string>());
  c.cell_feature_dim = j.at("cell_feature_dim").get<std::size_t>();
  c.tissue_feature_dim = j.at("tissue_feature_dim").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.cell_layers = j.at("cell_layers").get<std::size_t>();
  c.tissue_layers = j.at("tissue_layers").get<std::size_t>();
  c.hidden_dim = j.at("hidden_dim").get<std::size_t>();
  c.mlp_layers = j.at("mlp_layers").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.classifier_hidden = j.at("classifier_hidden").get<std::size_t>();
  c.graph_norm = j.at("graph_norm").get<bool>();
  return c;
}

/// One GNN over a single level: stacked layers followed by jumping knowledge.
class LevelGnn {
 public:
  struct Cache {
    std::vector<GnnLayer::Cache> layers;
    std::vector<Tensor> outputs;
    JumpingKnowledge::Cache jk;
  };

  LevelGnn() = default;
  LevelGnn(const HactNetConfig& c, std::size_t in, std::size_t depth, Rng& rng) {
    std::size_t d = in;
    for (std::size_t t = 0; t < depth; ++t) {
      layers_.emplace_back(c.layer_type, d, c.hidden_dim, c.mlp_layers, c.graph_norm, rng);
      d = c.hidden_dim;
    }
    jk_ = JumpingKnowledge(c.jk, depth, c.hidden_dim, rng);
  }

  std::size_t out_dim() const noexcept { return jk_.out_dim(); }
  std::vector<GnnLayer>& layers() noexcept { return layers_; }

  Tensor forward(const Tensor& x, const LevelBatch& lv, double delta, nn::Mode mode, Cache& cache) {
    cache.layers.assign(layers_.size(), {});
    cache.outputs.clear();
    cache.outputs.reserve(layers_.size());
    const Tensor* h = &x;
    for (std::size_t t = 0; t < layers_.size(); ++t) {
      cache.outputs.push_back(layers_[t].forward(*h, lv, delta, mode, &cache.layers[t]));
      h = &cache.outputs.back();
    }
    return jk_.forward(cache.outputs, &cache.jk);
  }

  /// Returns the gradient w.r.t. the level's input features.
  Tensor backward(Cache& cache, const LevelBatch& lv, double delta, const Tensor& dy) {
    auto per_layer = jk_.backward(cache.jk, dy, cache.outputs);
    Tensor g;
    for (std::size_t t = layers_.size(); t-- > 0;) {
      if (t + 1 < layers_.size()) add_inplace(per_layer[t], g);
      g = layers_[t].backward(cache.layers[t], lv, delta, per_layer[t]);
    }
    return g;
  }

  void collect(const std::string& prefix, nn::ParamList& out) {
    for (std::size_t t = 0; t < layers_.size(); ++t) layers_[t].collect(prefix + ".layer" + std::to_string(t), out);
    jk_.collect(prefix + ".jk", out);
  }
  void collect_buffers(const std::string& prefix, nn::BufferList& out) {
    for (std::size_t t = 0; t < layers_.size(); ++t)
      layers_[t].collect_buffers(prefix + ".layer" + std::to_string(t), out);
  }

 private:
  std::vector<GnnLayer> layers_;
  JumpingKnowledge jk_;
};

/// Hierarchical cell-graph / tissue-graph classifier.
class HactNet {
 public:
  struct Tape {
    nn::Mode mode = nn::Mode::train;
    LevelGnn::Cache cell, tissue;
    Tensor cell_out, tissue_in, tissue_out;
    Tensor readout, embedding;
    nn::Mlp::Cache classifier;
  };

  HactNet() = default;
  HactNet(const HactNetConfig& config, std::uint64_t seed) : config_(config) {
    config_.validate();
    Rng rng(seed);
    std::size_t readout = 0;
    if (config_.uses_cells()) {
      cell_ = LevelGnn(config_, config_.cell_feature_dim, config_.cell_layers, rng);
      if (config_.kind != ModelKind::hact) readout += cell_.out_dim();
    }
    if (config_.uses_tissue()) {
      const std::size_t in = config_.tissue_feature_dim + (config_.kind == ModelKind::hact ? cell_.out_dim() : 0);
      tissue_ = LevelGnn(config_, in, config_.tissue_layers, rng);
      readout += tissue_.out_dim();
    }
    embed_ = nn::Linear(readout, config_.embedding_dim, rng);
    classifier_ = nn::Mlp({config_.embedding_dim, config_.classifier_hidden, config_.num_classes}, rng);
  }

  const HactNetConfig& config() const noexcept { return config_; }
  double cell_delta = 1.0;
  double tissue_delta = 1.0;

  void check_batch(const HactBatch& b) const {
    if (config_.uses_cells() && b.cells.node_count() > 0 && b.cells.features.cols() != config_.cell_feature_dim)
      fail(Errc::shape_mismatch, "cell features have " + std::to_string(b.cells.features.cols()) +
                                     " columns, model expects " + std::to_string(config_.cell_feature_dim));
    if (config_.uses_tissue()) {
      if (b.tissue.features.cols() != config_.tissue_feature_dim)
        fail(Errc::shape_mismatch, "tissue features have " + std::to_string(b.tissue.features.cols()) +
                                       " columns, model expects " + std::to_string(config_.tissue_feature_dim));
      for (const auto n : b.tissue.sizes) require(n >= 1, Errc::invalid_argument, "readout of an empty tissue graph");
    }
  }

  /// Logits, one row per graph in the batch.
  Tensor forward(const HactBatch& b, nn::Mode mode, Tape& tape) {
    check_batch(b);
    tape.mode = mode;
    std::vector<const Tensor*> parts;
    Tensor cell_read;
    if (config_.uses_cells()) {
      Tensor x = b.cells.features;
      if (b.cells.node_count() == 0) x = Tensor::matrix(0, config_.cell_feature_dim);
      tape.cell_out = cell_.forward(x, b.cells, cell_delta, mode, tape.cell);
      if (config_.kind != ModelKind::hact) {
        cell_read = readout_sum(tape.cell_out, b.cells);
        parts.push_back(&cell_read);
      }
    }
    Tensor tissue_read;
    if (config_.uses_tissue()) {
      tape.tissue_in = config_.kind == ModelKind::hact
                           ? hconcat(b.tissue.features, scatter_cells(tape.cell_out, b.cell_region, b.tissue.node_count()))
                           : b.tissue.features;
      tape.tissue_out = tissue_.forward(tape.tissue_in, b.tissue, tissue_delta, mode, tape.tissue);
      tissue_read = readout_sum(tape.tissue_out, b.tissue);
      parts.push_back(&tissue_read);
    }
    tape.readout = hconcat(parts);
    tape.embedding = embed_.forward(tape.readout);
    return classifier_.forward(tape.embedding, &tape.classifier);
  }

  Tensor forward(const HactBatch& b, nn::Mode mode) {
    Tape tape;
    return forward(b, mode, tape);
  }

  /// Accumulates parameter gradients for dL/dlogits.
  void backward(const HactBatch& b, Tape& tape, const Tensor& dlogits) {
    const Tensor demb = classifier_.backward(tape.classifier, dlogits);
    const Tensor dread = embed_.backward(tape.readout, demb);
    std::size_t off = 0;
    Tensor dcell_out;
    if (config_.uses_cells() && config_.kind != ModelKind::hact) {
      dcell_out = readout_sum_backward(slice_cols(dread, off, cell_.out_dim()), b.cells);
      off += cell_.out_dim();
    }
    if (config_.uses_tissue()) {
      const Tensor dt = readout_sum_backward(slice_cols(dread, off, tissue_.out_dim()), b.tissue);
      const Tensor din = tissue_.backward(tape.tissue, b.tissue, tissue_delta, dt);
      if (config_.kind == ModelKind::hact) {
        const std::size_t d_tg = config_.tissue_feature_dim;
        dcell_out = gather_cells(slice_cols(din, d_tg, din.cols() - d_tg), b.cell_region);
      }
    }
    if (config_.uses_cells()) cell_.backward(tape.cell, b.cells, cell_delta, dcell_out);
  }

  nn::ParamList parameters() {
    nn::ParamList out;
    if (config_.uses_cells()) cell_.collect("cell", out);
    if (config_.uses_tissue()) tissue_.collect("tissue", out);
    embed_.collect("embed", out);
    classifier_.collect("classifier", out);
    return out;
  }

  nn::BufferList buffers() {
    nn::BufferList out;
    if (config_.uses_cells()) cell_.collect_buffers("cell", out);
    if (config_.uses_tissue()) tissue_.collect_buffers("tissue", out);
    return out;
  }

  void zero_grad() { nn::zero_grads(parameters()); }

  /// Sets the per-level PNA degree statistics from training graphs.
  void fit_delta(std::span<const graph::HactGraph* const> graphs) {
    if (config_.layer_type != LayerType::pna) return;
    std::vector<const graph::EntityGraph*> cg, tg;
    for (const auto* g : graphs) {
      cg.push_back(&g->cell_graph);
      tg.push_back(&g->tissue_graph);
    }
    if (config_.uses_cells()) cell_delta = compute_delta(cg).delta;
    if (config_.uses_tissue()) tissue_delta = compute_delta(tg).delta;
  }

 private:
  HactNetConfig config_;
  LevelGnn cell_, tissue_;
  nn::Linear embed_;
  nn::Mlp classifier_;
};

/// Eval-mode logits for one graph.
inline Tensor hactnet_forward(HactNet& net, const graph::HactGraph& g) {
  const Tensor logits = net.forward(make_batch(g), nn::Mode::eval);
  return Tensor({logits.cols()}, std::vector<double>(logits.storage()));
}

/// Mean cross-entropy over the batch, backward, one Adam step. Returns the loss.
inline double train_step(HactNet& net, nn::AdamState& opt, std::span<const graph::HactGraph* const> batch,
                         std::span<const std::size_t> labels) {
  require(batch.size() == labels.size(), Errc::shape_mismatch, "one label per graph required");
  for (const auto l : labels)
    if (l >= net.config().num_classes)
      fail(Errc::invalid_argument, "label " + std::to_string(l) + " out of range for " +
                                       std::to_string(net.config().num_classes) + " classes");
  const HactBatch b = make_batch(batch);
  HactNet::Tape tape;
  const Tensor logits = net.forward(b, nn::Mode::train, tape);
  const auto ce = nn::softmax_cross_entropy(logits, labels);
  const auto params = net.parameters();
  nn::zero_grads(params);
  net.backward(b, tape, ce.grad);
  nn::adam_step(opt, params);
  return ce.loss;
}

}  // namespace hact::gnn
