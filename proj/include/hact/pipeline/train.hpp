#pragma once

#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/gnn/hactnet.hpp"
#include "hact/pipeline/checkpoint.hpp"
#include "hact/pipeline/metrics.hpp"
#include "hact/pipeline/standardize.hpp"

namespace hact::pipeline {

struct LabeledGraphs {
  std::span<const graph::HactGraph> graphs;
  std::span<const std::size_t> labels;
};

struct TrainHooks {
  std::string checkpoint_path;  // rewritten after every epoch when set
  std::function<void(const EpochRecord&)> on_epoch;
  std::size_t stop_after = 0;  // stop once this many epochs are done (0 = run the full budget)
};

/// Fills zero feature widths / class count from the data and rejects mismatches.
inline gnn::HactNetConfig resolve_model_config(gnn::HactNetConfig m, std::span<const graph::HactGraph> graphs,
                                               std::size_t classes) {
  std::size_t cell = 0, tissue = 0;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    const auto& g = graphs[i];
    auto check = [&](std::size_t& seen, std::size_t d, std::size_t n, const char* level) {
      if (n == 0) return;
      if (seen == 0) seen = d;
      require(seen == d, Errc::shape_mismatch,
              std::string(level) + " features of graph " + std::to_string(i) + " have width " + std::to_string(d) +
                  ", earlier graphs " + std::to_string(seen));
    };
    check(cell, g.cell_graph.feature_dim(), g.cell_graph.node_count, "cell");
    check(tissue, g.tissue_graph.feature_dim(), g.tissue_graph.node_count, "tissue");
  }
  auto settle = [](std::size_t& cfg, std::size_t data, const char* what) {
    if (cfg == 0) cfg = data;
    else
      require(data == 0 || cfg == data, Errc::shape_mismatch,
              std::string("config expects ") + what + " width " + std::to_string(cfg) + " but graphs have " +
                  std::to_string(data));
  };
  settle(m.cell_feature_dim, cell, "cell feature");
  settle(m.tissue_feature_dim, tissue, "tissue feature");
  if (m.num_classes == 0) m.num_classes = classes;
  require(classes == 0 || m.num_classes == classes, Errc::shape_mismatch,
          "config has " + std::to_string(m.num_classes) + " classes, data has " + std::to_string(classes));
  m.validate();
  return m;
}

/// Argmax class per graph (ties to the lower id), eval mode, in batches.
inline std::vector<std::size_t> predict(gnn::HactNet& net, std::span<const graph::HactGraph> graphs,
                                        std::size_t batch_size = 16) {
  std::vector<std::size_t> out;
  for (std::size_t s = 0; s < graphs.size(); s += batch_size) {
    std::vector<const graph::HactGraph*> ptr;
    for (std::size_t i = s; i < std::min(graphs.size(), s + batch_size); ++i) ptr.push_back(&graphs[i]);
    const Tensor logits = net.forward(gnn::make_batch(ptr), nn::Mode::eval);
    for (std::size_t r = 0; r < logits.rows(); ++r) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < logits.cols(); ++c)
        if (logits(r, c) > logits(r, arg)) arg = c;
      out.push_back(arg);
    }
  }
  return out;
}

/// Deterministic per-(seed, epoch) stream for the shuffle.
inline std::uint64_t epoch_seed(std::uint64_t seed, std::size_t epoch) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (static_cast<std::uint64_t>(epoch) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

/// Mini-batches over a shuffled order; a trailing single graph joins the
/// previous batch because train-mode BatchNorm needs more than one row.
inline std::vector<std::vector<std::size_t>> epoch_batches(std::size_t n, std::size_t batch_size, std::uint64_t seed,
                                                           std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(epoch_seed(seed, epoch));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t s = 0; s < n; s += batch_size)
    out.emplace_back(order.begin() + static_cast<long>(s), order.begin() + static_cast<long>(std::min(n, s + batch_size)));
  if (out.size() >= 2 && out.back().size() == 1) {
    out[out.size() - 2].push_back(out.back()[0]);
    out.pop_back();
  }
  return out;
}

/// Trains for the configured epoch budget and keeps the weights with the best
/// validation weighted F1 (first epoch wins ties). Pass `resume` to continue
/// from a checkpoint written by an earlier, interrupted call.
inline Checkpoint train_model(LabeledGraphs train, LabeledGraphs val, const TrainConfig& config,
                              const std::vector<std::string>& class_names, const TrainHooks& hooks = {},
                              const Checkpoint* resume = nullptr) {
  config.validate();
  require(!train.graphs.empty() && !val.graphs.empty(), Errc::invalid_argument, "train and val splits must be non-empty");
  require(train.graphs.size() == train.labels.size() && val.graphs.size() == val.labels.size(), Errc::shape_mismatch,
          "one label per graph required");

  Checkpoint ck;
  ck.config = config;
  ck.class_names = class_names;
  ck.config.model = resolve_model_config(config.model, train.graphs, class_names.size());
  resolve_model_config(ck.config.model, val.graphs, class_names.size());
  const std::size_t classes = ck.config.model.num_classes;
  for (const auto l : train.labels) require(l < classes, Errc::out_of_bounds, "train label out of range");
  for (const auto l : val.labels) require(l < classes, Errc::out_of_bounds, "val label out of range");

  gnn::HactNet net(ck.config.model, ck.config.seed);
  std::vector<const graph::HactGraph*> train_ptr;
  for (const auto& g : train.graphs) train_ptr.push_back(&g);
  net.fit_delta(train_ptr);
  ck.cell_delta = net.cell_delta;
  ck.tissue_delta = net.tissue_delta;
  ck.stats = ck.config.standardize ? Standardizer::fit(train.graphs) : Standardizer{};
  ck.names = state_names(net);
  ck.adam.lr = ck.config.learning_rate;
  ck.current = snapshot(net);
  ck.best = ck.current;

  if (resume) {
    auto same_budget = resume->config;
    same_budget.epochs = ck.config.epochs;
    require(to_json(same_budget) == to_json(ck.config), Errc::invalid_argument,
            "resume checkpoint was written with a different configuration");
    require(resume->epochs_done <= ck.config.epochs, Errc::invalid_argument,
            "resume checkpoint already has " + std::to_string(resume->epochs_done) + " epochs, budget is " +
                std::to_string(ck.config.epochs));
    require(resume->names == ck.names, Errc::shape_mismatch, "resume checkpoint has a different tensor layout");
    require(resume->stats == ck.stats && resume->cell_delta == ck.cell_delta && resume->tissue_delta == ck.tissue_delta,
            Errc::invalid_argument, "resume checkpoint was fitted on different training data");
    const std::size_t budget = ck.config.epochs;
    ck = *resume;
    ck.config.epochs = budget;
    restore(net, ck.current);
  }

  const auto train_std = ck.stats.transformed(train.graphs);
  const auto val_std = ck.stats.transformed(val.graphs);

  while (ck.epochs_done < ck.config.epochs) {
    if (hooks.stop_after && ck.epochs_done >= hooks.stop_after) break;
    const std::size_t epoch = ck.epochs_done;
    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (const auto& idx : epoch_batches(train_std.size(), ck.config.batch_size, ck.config.seed, epoch)) {
      std::vector<const graph::HactGraph*> batch;
      std::vector<std::size_t> labels;
      for (auto i : idx) {
        batch.push_back(&train_std[i]);
        labels.push_back(train.labels[i]);
      }
      loss_sum += gnn::train_step(net, ck.adam, batch, labels) * static_cast<double>(idx.size());
      seen += idx.size();
    }
    const auto m = evaluate_predictions(val.labels, predict(net, val_std), classes);
    const EpochRecord rec{epoch + 1, loss_sum / static_cast<double>(seen), m.weighted_f1, m.accuracy};
    ck.log.push_back(rec);
    ck.current = snapshot(net);
    if (m.weighted_f1 > ck.best_val_f1) {
      ck.best_val_f1 = m.weighted_f1;
      ck.best_epoch = rec.epoch;
      ck.best = ck.current;
    }
    ck.epochs_done = epoch + 1;
    if (!hooks.checkpoint_path.empty()) save_checkpoint(ck, hooks.checkpoint_path);
    if (hooks.on_epoch) hooks.on_epoch(rec);
  }
  return ck;
}

/// Eval-mode metrics of the checkpoint's best weights on labelled graphs.
inline Metrics evaluate(const Checkpoint& ck, LabeledGraphs data) {
  require(data.graphs.size() == data.labels.size(), Errc::shape_mismatch, "one label per graph required");
  require(!data.graphs.empty(), Errc::invalid_argument, "nothing to evaluate");
  resolve_model_config(ck.config.model, data.graphs, 0);
  gnn::HactNet net = build_model(ck, true);
  const auto graphs = ck.stats.transformed(data.graphs);
  return evaluate_predictions(data.labels, predict(net, graphs), ck.config.model.num_classes);
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (0 for a single value)
};

inline MeanStd mean_std(std::span<const double> v) {
  MeanStd r;
  if (v.empty()) return r;
  for (double x : v) r.mean += x;
  r.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - r.mean) * (x - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return r;
}

}  // namespace hact::pipeline
