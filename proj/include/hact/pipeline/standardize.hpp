#pragma once

#include <cmath>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/graph/entity_graph.hpp"

namespace hact::pipeline {

/// Per-column z-score statistics. Columns with (near) zero spread get scale 1.
struct ColumnStats {
  std::vector<double> mean;
  std::vector<double> scale;

  bool empty() const noexcept { return mean.empty(); }

  void apply(Tensor& x) const {
    if (empty() || x.rows() == 0) return;
    require(x.cols() == mean.size(), Errc::shape_mismatch,
            "feature width " + std::to_string(x.cols()) + " differs from the standardisation width " +
                std::to_string(mean.size()));
    for (std::size_t r = 0; r < x.rows(); ++r)
      for (std::size_t c = 0; c < x.cols(); ++c) x(r, c) = (x(r, c) - mean[c]) / scale[c];
  }

  friend bool operator==(const ColumnStats&, const ColumnStats&) = default;
};

inline ColumnStats fit_columns(std::span<const Tensor* const> parts) {
  ColumnStats s;
  std::size_t d = 0, n = 0;
  for (const auto* t : parts)
    if (t->rows()) d = t->cols();
  s.mean.assign(d, 0.0);
  s.scale.assign(d, 1.0);
  for (const auto* t : parts) {
    if (!t->rows()) continue;
    require(t->cols() == d, Errc::shape_mismatch, "graphs disagree on feature width");
    for (std::size_t r = 0; r < t->rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) s.mean[c] += (*t)(r, c);
    n += t->rows();
  }
  if (n == 0) return s;
  for (auto& m : s.mean) m /= static_cast<double>(n);
  std::vector<double> var(d, 0.0);
  for (const auto* t : parts)
    for (std::size_t r = 0; r < t->rows(); ++r)
      for (std::size_t c = 0; c < d; ++c) {
        const double e = (*t)(r, c) - s.mean[c];
        var[c] += e * e;
      }
  for (std::size_t c = 0; c < d; ++c) {
    const double sd = std::sqrt(var[c] / static_cast<double>(n));
    s.scale[c] = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

/// Cell and tissue feature statistics fitted on training graphs.
struct Standardizer {
  ColumnStats cell, tissue;

  static Standardizer fit(std::span<const graph::HactGraph> graphs) {
    std::vector<const Tensor*> c, t;
    for (const auto& g : graphs) {
      c.push_back(&g.cell_graph.features);
      t.push_back(&g.tissue_graph.features);
    }
    return {fit_columns(c), fit_columns(t)};
  }

  void apply(graph::HactGraph& g) const {
    cell.apply(g.cell_graph.features);
    tissue.apply(g.tissue_graph.features);
  }

  std::vector<graph::HactGraph> transformed(std::span<const graph::HactGraph> graphs) const {
    std::vector<graph::HactGraph> out(graphs.begin(), graphs.end());
    for (auto& g : out) apply(g);
    return out;
  }

  friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

inline nlohmann::json to_json(const Standardizer& s) {
  return {{"cell_mean", s.cell.mean}, {"cell_scale", s.cell.scale},
          {"tissue_mean", s.tissue.mean}, {"tissue_scale", s.tissue.scale}};
}

inline Standardizer standardizer_from_json(const nlohmann::json& j) {
  Standardizer s;
  s.cell.mean = j.at("cell_mean").get<std::vector<double>>();
  s.cell.scale = j.at("cell_scale").get<std::vector<double>>();
  s.tissue.mean = j.at("tissue_mean").get<std::vector<double>>();
  s.tissue.scale = j.at("tissue_scale").get<std::vector<double>>();
  require(s.cell.mean.size() == s.cell.scale.size() && s.tissue.mean.size() == s.tissue.scale.size(),
          Errc::parse_error, "standardisation vectors have mismatched lengths");
  return s;
}

}  // namespace hact::pipeline
