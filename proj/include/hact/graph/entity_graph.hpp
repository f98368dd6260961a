#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/entity/nuclei.hpp"

namespace hact::graph {

using entity::Point;

/// Undirected edge with first < second.
using Edge = std::pair<std::uint32_t, std::uint32_t>;
/// Sorted, duplicate-free list of undirected edges.
using EdgeList = std::vector<Edge>;

enum class EntityKind { cell, tissue };

inline const char* to_string(EntityKind k) { return k == EntityKind::cell ? "cell" : "tissue"; }

/// Attributed undirected graph over detected entities (nuclei or tissue regions).
struct EntityGraph {
  EntityKind kind = EntityKind::cell;
  std::size_t node_count = 0;
  EdgeList edges;
  Tensor features;              // node_count x d
  std::vector<Point> centroids;  // pixel coordinates

  std::size_t feature_dim() const noexcept { return features.cols(); }

  std::vector<std::size_t> degrees() const {
    std::vector<std::size_t> d(node_count, 0);
    for (const auto& [a, b] : edges) {
      ++d[a];
      ++d[b];
    }
    return d;
  }

  void validate() const {
    require(centroids.size() == node_count, Errc::shape_mismatch,
            std::string(to_string(kind)) + " graph: centroid count differs from node count");
    require(features.rows() == node_count, Errc::shape_mismatch,
            std::string(to_string(kind)) + " graph: feature rows " + std::to_string(features.rows()) +
                " != node count " + std::to_string(node_count));
    for (std::size_t i = 0; i < edges.size(); ++i) {
      const auto& [a, b] = edges[i];
      require(a < b, Errc::invalid_argument, "edges must be stored as (low, high) without self-loops");
      require(b < node_count, Errc::out_of_bounds, "edge endpoint out of range");
      require(i == 0 || edges[i - 1] < edges[i], Errc::invalid_argument, "edge list must be sorted and unique");
    }
    require(features.all_finite(), Errc::non_finite, "node features contain non-finite values");
  }

  friend bool operator==(const EntityGraph&, const EntityGraph&) = default;
};

inline EntityGraph empty_graph(EntityKind kind) {
  EntityGraph g;
  g.kind = kind;
  return g;
}

/// Cell graph + tissue graph + cell-to-tissue assignment. Cell i belongs to
/// tissue region cell_region[i]; the dense binary matrix is derived on demand.
struct HactGraph {
  std::size_t width = 0;
  std::size_t height = 0;
  EntityGraph cell_graph = empty_graph(EntityKind::cell);
  EntityGraph tissue_graph = empty_graph(EntityKind::tissue);
  std::vector<std::uint32_t> cell_region;

  Tensor assignment_matrix() const {
    Tensor a = Tensor::matrix(cell_graph.node_count, tissue_graph.node_count);
    for (std::size_t i = 0; i < cell_region.size(); ++i) a(i, cell_region[i]) = 1.0;
    return a;
  }

  void validate() const {
    cell_graph.validate();
    tissue_graph.validate();
    require(cell_region.size() == cell_graph.node_count, Errc::shape_mismatch,
            "assignment must have one row per cell");
    for (auto r : cell_region)
      require(r < tissue_graph.node_count, Errc::out_of_bounds, "cell assigned to a missing tissue region");
  }

  friend bool operator==(const HactGraph&, const HactGraph&) = default;
};

/// Canonical edge list: symmetric pairs collapsed, self-loops dropped, sorted.
inline EdgeList canonical_edges(std::vector<Edge> raw) {
  for (auto& e : raw)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::erase_if(raw, [](const Edge& e) { return e.first == e.second; });
  std::sort(raw.begin(), raw.end());
  raw.erase(std::unique(raw.begin(), raw.end()), raw.end());
  return raw;
}

// ---- JSON codec -----------------------------------------------------------

inline nlohmann::json to_json(const EntityGraph& g) {
  nlohmann::json centroids = nlohmann::json::array(), edges = nlohmann::json::array(),
                 features = nlohmann::json::array();
  for (const auto& p : g.centroids) centroids.push_back({p.x, p.y});
  for (const auto& [a, b] : g.edges) edges.push_back({a, b});
  for (std::size_t r = 0; r < g.features.rows(); ++r) {
    auto row = g.features.row(r);
    features.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return {{"centroids", centroids}, {"edges", edges}, {"features", features}, {"feature_dim", g.feature_dim()}};
}

inline EntityGraph entity_graph_from_json(const nlohmann::json& j, EntityKind kind) {
  EntityGraph g = empty_graph(kind);
  for (const auto& c : j.at("centroids")) g.centroids.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
  g.node_count = g.centroids.size();
  std::vector<Edge> raw;
  for (const auto& e : j.at("edges")) raw.emplace_back(e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>());
  g.edges = canonical_edges(std::move(raw));
  const std::size_t dim = j.contains("feature_dim") ? j["feature_dim"].get<std::size_t>()
                          : j.at("features").empty() ? 0
                                                     : j["features"][0].size();
  std::vector<double> vals;
  for (const auto& row : j.at("features")) {
    require(row.size() == dim, Errc::parse_error, "ragged feature matrix");
    for (const auto& v : row) vals.push_back(v.get<double>());
  }
  g.features = Tensor({j.at("features").size(), dim}, std::move(vals));
  return g;
}

inline nlohmann::json to_json(const HactGraph& g) {
  std::vector<int> bits(g.cell_graph.node_count * g.tissue_graph.node_count, 0);
  for (std::size_t i = 0; i < g.cell_region.size(); ++i) bits[i * g.tissue_graph.node_count + g.cell_region[i]] = 1;
  return {{"width", g.width},
          {"height", g.height},
          {"cell", to_json(g.cell_graph)},
          {"tissue", to_json(g.tissue_graph)},
          {"assignment", bits}};
}

inline HactGraph hact_from_json(const nlohmann::json& j) {
  HactGraph g;
  try {
    g.width = j.value("width", std::size_t{0});
    g.height = j.value("height", std::size_t{0});
    g.cell_graph = entity_graph_from_json(j.at("cell"), EntityKind::cell);
    g.tissue_graph = entity_graph_from_json(j.at("tissue"), EntityKind::tissue);
    const auto& bits = j.at("assignment");
    const std::size_t n = g.cell_graph.node_count, m = g.tissue_graph.node_count;
    require(bits.size() == n * m, Errc::parse_error,
            "assignment has " + std::to_string(bits.size()) + " entries, expected " + std::to_string(n * m));
    g.cell_region.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
      int ones = 0;
      for (std::size_t r = 0; r < m; ++r) {
        const int b = bits[i * m + r].get<int>();
        require(b == 0 || b == 1, Errc::parse_error, "assignment entries must be 0 or 1");
        if (b) {
          ++ones;
          g.cell_region[i] = static_cast<std::uint32_t>(r);
        }
      }
      require(ones == 1, Errc::parse_error, "assignment row " + std::to_string(i) + " must contain exactly one 1");
    }
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, std::string("malformed HACT graph JSON: ") + e.what());
  }
  g.validate();
  return g;
}

inline void save_hact(const HactGraph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write " + path);
  out << to_json(g).dump() << "\n";
}

inline HactGraph load_hact(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::parse_error, path + ": " + e.what());
  }
  return hact_from_json(j);
}

}  // namespace hact::graph
