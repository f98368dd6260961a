#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/pipeline/synthetic.hpp"
#include "hact/pipeline/train.hpp"

namespace hact::pipeline {

struct SplitData {
  std::vector<graph::HactGraph> graphs;
  std::vector<std::size_t> labels;

  LabeledGraphs view() const { return {graphs, labels}; }
};

struct Dataset {
  std::vector<std::string> class_names;
  SplitData train, val, test;
};

inline Dataset split_dataset(const SyntheticDataset& ds, const SplitIndices& split) {
  Dataset d;
  d.class_names = ds.class_names;
  auto take = [&](const std::vector<std::size_t>& idx, SplitData& out) {
    for (auto i : idx) {
      out.graphs.push_back(ds.graphs[i]);
      out.labels.push_back(ds.labels[i]);
    }
  };
  take(split.train, d.train);
  take(split.val, d.val);
  take(split.test, d.test);
  return d;
}

struct RunResult {
  std::uint64_t seed = 0;
  Checkpoint checkpoint;
  Metrics test;
};

/// Trains with seeds config.seed .. config.seed + runs - 1 and evaluates each
/// best-validation model on the test split.
inline std::vector<RunResult> run_seeds(const Dataset& data, TrainConfig config, std::size_t runs,
                                        const std::function<void(std::uint64_t, const EpochRecord&)>& on_epoch = {}) {
  require(runs >= 1, Errc::invalid_argument, "need at least one run");
  std::vector<RunResult> out;
  const std::uint64_t base = config.seed;
  for (std::size_t r = 0; r < runs; ++r) {
    config.seed = base + r;
    TrainHooks hooks;
    if (on_epoch) hooks.on_epoch = [&, s = config.seed](const EpochRecord& rec) { on_epoch(s, rec); };
    RunResult res;
    res.seed = config.seed;
    res.checkpoint = train_model(data.train.view(), data.val.view(), config, data.class_names, hooks);
    res.test = evaluate(res.checkpoint, data.test.view());
    out.push_back(std::move(res));
  }
  return out;
}

inline MeanStd test_f1_summary(const std::vector<RunResult>& runs) {
  std::vector<double> f1;
  for (const auto& r : runs) f1.push_back(r.test.weighted_f1);
  return mean_std(f1);
}

struct AblationRow {
  std::string features;
  gnn::ModelKind kind = gnn::ModelKind::hact;
  gnn::LayerType layer = gnn::LayerType::pna;
  gnn::JkMode jk = gnn::JkMode::lstm;
  std::vector<double> test_f1;
  MeanStd summary;
};

struct AblationGrid {
  std::vector<std::pair<std::string, const Dataset*>> features;
  std::vector<gnn::ModelKind> kinds = {gnn::ModelKind::hact};
  std::vector<gnn::LayerType> layers = {gnn::LayerType::pna};
  std::vector<gnn::JkMode> jk = {gnn::JkMode::lstm};
};

/// Every combination of feature set x model kind x layer type x JK mode,
/// each trained over `runs` seeds.
inline std::vector<AblationRow> run_ablation(const AblationGrid& grid, const TrainConfig& base, std::size_t runs,
                                             const std::function<void(const AblationRow&)>& on_row = {}) {
  std::vector<AblationRow> rows;
  for (const auto& [fname, data] : grid.features)
    for (const auto layer : grid.layers)
      for (const auto jk : grid.jk)
        for (const auto kind : grid.kinds) {
          TrainConfig cfg = base;
          cfg.model.kind = kind;
          cfg.model.layer_type = layer;
          cfg.model.jk = jk;
          AblationRow row{fname, kind, layer, jk, {}, {}};
          for (const auto& r : run_seeds(*data, cfg, runs)) row.test_f1.push_back(r.test.weighted_f1);
          row.summary = mean_std(row.test_f1);
          if (on_row) on_row(row);
          rows.push_back(std::move(row));
        }
  return rows;
}

inline nlohmann::json to_json(const AblationRow& r) {
  return {{"features", r.features},
          {"kind", gnn::to_string(r.kind)},
          {"layer", gnn::to_string(r.layer)},
          {"jk", gnn::to_string(r.jk)},
          {"test_weighted_f1", r.test_f1},
          {"mean", r.summary.mean},
          {"std", r.summary.std}};
}

}  // namespace hact::pipeline
