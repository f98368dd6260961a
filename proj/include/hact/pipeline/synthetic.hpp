#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/entity/superpixel.hpp"
#include "hact/graph/assemble.hpp"
#include "hact/graph/topology.hpp"
#include "hact/pipeline/manifest.hpp"

namespace hact::pipeline {

/// Generative parameters of one synthetic class.
struct ClassRecipe {
  std::string name;
  std::size_t min_cells = 8;
  std::size_t max_cells = 80;
  double cell_density = 0.002;  // cells per square pixel
  std::size_t clusters = 0;     // 0 = uniform placement
  double cluster_spread = 0.12;  // cluster std as a fraction of the image side
  double cell_feature_mean = 0.0;
  std::size_t regions = 4;
  double tissue_feature_mean = 0.0;

  void validate() const {
    require(min_cells >= 1 && max_cells >= min_cells, Errc::invalid_argument, name + ": bad cell count range");
    require(cell_density > 0.0, Errc::invalid_argument, name + ": cell density must be positive");
    require(regions >= 1, Errc::invalid_argument, name + ": need at least one region");
    require(cluster_spread > 0.0, Errc::invalid_argument, name + ": cluster spread must be positive");
  }

  bool same_generator(const ClassRecipe& o) const {
    return min_cells == o.min_cells && max_cells == o.max_cells && cell_density == o.cell_density &&
           clusters == o.clusters && cluster_spread == o.cluster_spread && cell_feature_mean == o.cell_feature_mean &&
           regions == o.regions && tissue_feature_mean == o.tissue_feature_mean;
  }
};

struct SyntheticOptions {
  std::size_t cell_dim = 8;
  std::size_t tissue_dim = 8;
  std::size_t k = 5;
  double d_min = 40.0;
};

struct SyntheticDataset {
  std::vector<std::string> class_names;
  std::vector<graph::HactGraph> graphs;
  std::vector<std::size_t> labels;
};

inline nlohmann::json to_json(const ClassRecipe& r) {
  return {{"name", r.name},
          {"min_cells", r.min_cells},
          {"max_cells", r.max_cells},
          {"cell_density", r.cell_density},
          {"clusters", r.clusters},
          {"cluster_spread", r.cluster_spread},
          {"cell_feature_mean", r.cell_feature_mean},
          {"regions", r.regions},
          {"tissue_feature_mean", r.tissue_feature_mean}};
}

inline ClassRecipe recipe_from_json(const nlohmann::json& j) {
  ClassRecipe r;
  r.name = j.value("name", r.name);
  r.min_cells = j.value("min_cells", r.min_cells);
  r.max_cells = j.value("max_cells", r.max_cells);
  r.cell_density = j.value("cell_density", r.cell_density);
  r.clusters = j.value("clusters", r.clusters);
  r.cluster_spread = j.value("cluster_spread", r.cluster_spread);
  r.cell_feature_mean = j.value("cell_feature_mean", r.cell_feature_mean);
  r.regions = j.value("regions", r.regions);
  r.tissue_feature_mean = j.value("tissue_feature_mean", r.tissue_feature_mean);
  return r;
}

/// Two classes that differ at the cell level (density, clustering, feature
/// mean) and at the tissue level (region count, feature mean).
inline std::vector<ClassRecipe> two_class_recipes() {
  ClassRecipe a{.name = "sparse"};
  ClassRecipe b{.name = "dense"};
  b.cell_density = 0.004;
  b.clusters = 3;
  b.cell_feature_mean = 0.5;
  b.regions = 8;
  b.tissue_feature_mean = 0.5;
  return {a, b};
}

/// 2x2 design: one factor lives only in the cells, the other only in the
/// tissue regions, so a single level can tell apart at most two of the classes.
inline std::vector<ClassRecipe> factorial_recipes(double cell_shift = 1.0, double tissue_shift = 1.0) {
  std::vector<ClassRecipe> out;
  for (int t = 0; t < 2; ++t)
    for (int c = 0; c < 2; ++c) {
      ClassRecipe r;
      r.name = std::string(c ? "C+" : "C-") + (t ? "T+" : "T-");
      r.cell_feature_mean = c * cell_shift;
      r.tissue_feature_mean = t * tissue_shift;
      r.regions = t ? 8 : 4;
      out.push_back(r);
    }
  return out;
}

namespace detail {

/// Voronoi partition of a w x h canvas around the seeds (ties to the lower id).
inline LabelImage voronoi_labels(std::size_t w, std::size_t h, std::span<const graph::Point> seeds) {
  LabelImage img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double best = std::numeric_limits<double>::infinity();
      std::uint32_t arg = 0;
      for (std::uint32_t s = 0; s < seeds.size(); ++s) {
        const double dx = seeds[s].x - static_cast<double>(x), dy = seeds[s].y - static_cast<double>(y);
        const double d = dx * dx + dy * dy;
        if (d < best) {
          best = d;
          arg = s;
        }
      }
      img.at(x, y) = arg;
    }
  return img;
}

}  // namespace detail

/// One synthetic HACT graph with `cells` nuclei drawn from the recipe.
inline graph::HactGraph synthesize_graph(const ClassRecipe& r, std::size_t cells, const SyntheticOptions& opt,
                                         Rng& rng) {
  const double side = std::max(16.0, std::sqrt(static_cast<double>(cells) / r.cell_density));
  const auto size = static_cast<std::size_t>(std::ceil(side));
  const double extent = static_cast<double>(size) - 1.0;

  std::vector<graph::Point> centres;
  for (std::size_t c = 0; c < r.clusters; ++c)
    centres.push_back({rng.uniform(0.15, 0.85) * extent, rng.uniform(0.15, 0.85) * extent});
  std::vector<graph::Point> pos;
  for (std::size_t i = 0; i < cells; ++i) {
    if (centres.empty()) {
      pos.push_back({rng.uniform(0.0, extent), rng.uniform(0.0, extent)});
    } else {
      const auto& c = centres[rng.index(centres.size())];
      const double sd = r.cluster_spread * extent;
      pos.push_back({std::clamp(c.x + sd * rng.normal(), 0.0, extent), std::clamp(c.y + sd * rng.normal(), 0.0, extent)});
    }
  }

  // Region seeds at least 2 px apart so that every Voronoi cell owns pixels.
  std::vector<graph::Point> seeds;
  while (seeds.size() < r.regions) {
    const graph::Point p{rng.uniform(0.0, extent), rng.uniform(0.0, extent)};
    const bool clear = std::all_of(seeds.begin(), seeds.end(), [&](const graph::Point& q) {
      return std::hypot(p.x - q.x, p.y - q.y) >= 2.0;
    });
    if (clear) seeds.push_back(p);
  }
  entity::SuperpixelMap map;
  map.labels = detail::voronoi_labels(size, size, seeds);
  map.region_count = static_cast<std::uint32_t>(r.regions);

  graph::HactGraph g;
  g.width = g.height = size;
  g.cell_graph.node_count = cells;
  g.cell_graph.centroids = pos;
  g.cell_graph.edges = graph::build_cell_topology(pos, opt.k, opt.d_min);
  g.cell_graph.features = Tensor::matrix(cells, opt.cell_dim);
  for (auto& v : g.cell_graph.features.values()) v = rng.normal(r.cell_feature_mean, 1.0);

  g.tissue_graph.node_count = r.regions;
  g.tissue_graph.centroids = graph::detail::region_centroids(map);
  g.tissue_graph.edges = graph::build_tissue_topology(map);
  g.tissue_graph.features = Tensor::matrix(r.regions, opt.tissue_dim);
  for (auto& v : g.tissue_graph.features.values()) v = rng.normal(r.tissue_feature_mean, 1.0);

  for (const auto& p : pos) g.cell_region.push_back(map.at(graph::pixel_index(p.x, size),
                                                          graph::pixel_index(p.y, size)));
  g.validate();
  return g;
}

/// Small random graph for property checks: 1..max_cells cells, 1..max_regions regions.
inline graph::HactGraph random_graph(Rng& rng, std::size_t max_cells, std::size_t max_regions,
                                     const SyntheticOptions& opt = {}) {
  require(max_cells >= 1 && max_regions >= 1, Errc::invalid_argument, "graph size bounds must be positive");
  ClassRecipe r;
  r.cell_density = 0.004;
  r.clusters = rng.index(3);
  r.cell_feature_mean = rng.uniform(-1.0, 1.0);
  r.tissue_feature_mean = rng.uniform(-1.0, 1.0);
  r.regions = 1 + rng.index(max_regions);
  const std::size_t cells = 1 + rng.index(max_cells);
  return synthesize_graph(r, cells, opt, rng);
}

/// `n_per_class` graphs per recipe. Cell counts are log-spaced between the
/// recipe's bounds; the output order is shuffled. Deterministic per seed.
inline SyntheticDataset generate_synthetic_dataset(std::uint64_t seed, std::size_t n_per_class,
                                                   const std::vector<ClassRecipe>& recipes,
                                                   const SyntheticOptions& opt = {}) {
  require(recipes.size() >= 2, Errc::invalid_argument, "need at least two class recipes");
  require(n_per_class >= 1, Errc::invalid_argument, "need at least one graph per class");
  for (std::size_t a = 0; a < recipes.size(); ++a) {
    recipes[a].validate();
    for (std::size_t b = 0; b < a; ++b)
      require(!recipes[a].same_generator(recipes[b]), Errc::invalid_argument,
              "recipes '" + recipes[b].name + "' and '" + recipes[a].name + "' are identical");
  }
  Rng rng(seed);
  SyntheticDataset ds;
  for (const auto& r : recipes) ds.class_names.push_back(r.name);
  std::vector<std::pair<std::size_t, std::size_t>> plan;  // (class, cells)
  for (std::size_t c = 0; c < recipes.size(); ++c) {
    const double lo = static_cast<double>(recipes[c].min_cells), hi = static_cast<double>(recipes[c].max_cells);
    for (std::size_t i = 0; i < n_per_class; ++i) {
      const double t = n_per_class == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_per_class - 1);
      plan.emplace_back(c, static_cast<std::size_t>(std::llround(lo * std::pow(hi / lo, t))));
    }
  }
  rng.shuffle(plan);
  for (const auto& [c, cells] : plan) {
    ds.graphs.push_back(synthesize_graph(recipes[c], cells, opt, rng));
    ds.labels.push_back(c);
  }
  return ds;
}

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
};

/// Per-class split by the given val / test fractions (rest is train).
inline SplitIndices stratified_split(std::span<const std::size_t> labels, double val_fraction, double test_fraction,
                                     std::uint64_t seed) {
  require(val_fraction >= 0 && test_fraction >= 0 && val_fraction + test_fraction < 1.0, Errc::invalid_argument,
          "split fractions must leave room for training data");
  std::size_t classes = 0;
  for (auto l : labels) classes = std::max(classes, l + 1);
  Rng rng(seed);
  SplitIndices s;
  for (std::size_t c = 0; c < classes; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) idx.push_back(i);
    rng.shuffle(idx);
    const auto nv = static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(idx.size())));
    const auto nt = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < idx.size(); ++i) (i < nv ? s.val : i < nv + nt ? s.test : s.train).push_back(idx[i]);
  }
  for (auto* v : {&s.train, &s.val, &s.test}) std::sort(v->begin(), v->end());
  return s;
}

/// Writes graphs/<index>.json and train/val/test manifests under `dir`.
inline void write_synthetic(const SyntheticDataset& ds, const SplitIndices& split, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "graphs");
  auto graph_path = [&](std::size_t i) {
    std::ostringstream name;
    name << std::setw(5) << std::setfill('0') << i << ".json";
    return (fs::path(dir) / "graphs" / name.str()).string();
  };
  for (std::size_t i = 0; i < ds.graphs.size(); ++i) graph::save_hact(ds.graphs[i], graph_path(i));
  const std::pair<Split, const std::vector<std::size_t>*> parts[] = {
      {Split::train, &split.train}, {Split::val, &split.val}, {Split::test, &split.test}};
  for (const auto& [which, idx] : parts) {
    DatasetManifest m;
    m.split = which;
    m.class_names = ds.class_names;
    for (auto i : *idx) m.entries.push_back({graph_path(i), ds.labels[i]});
    save_manifest(m, (fs::path(dir) / (std::string(to_string(which)) + ".jsonl")).string());
  }
}

}  // namespace hact::pipeline
