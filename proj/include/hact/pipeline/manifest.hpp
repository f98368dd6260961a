#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hact/core/error.hpp"
#include "hact/graph/entity_graph.hpp"

namespace hact::pipeline {

enum class Split { train, val, test };

inline const char* to_string(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

struct ManifestEntry {
  std::string graph;  // path to a HACT graph JSON
  std::size_t label = 0;

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::vector<std::string> class_names;
  Split split = Split::train;

  std::size_t size() const noexcept { return entries.size(); }

  void validate() const {
    require(!class_names.empty(), Errc::invalid_argument, "manifest has no class names");
    for (const auto& e : entries)
      require(e.label < class_names.size(), Errc::out_of_bounds,
              e.graph + ": label " + std::to_string(e.label) + " >= class count " + std::to_string(class_names.size()));
  }

  friend bool operator==(const DatasetManifest&, const DatasetManifest&) = default;
};

/// JSON lines. An optional first line {"classes": [...]} names the classes;
/// every other line is {"graph": path, "label": id or class name}. Relative
/// graph paths are resolved against the manifest's directory.
inline DatasetManifest load_manifest(const std::string& path, Split split,
                                     std::vector<std::string> class_names = {}, bool check_files = true) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open manifest " + path);
  const auto base = std::filesystem::path(path).parent_path();
  DatasetManifest m;
  m.split = split;
  m.class_names = std::move(class_names);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(Errc::parse_error, where + ": " + e.what());
    }
    if (j.contains("classes")) {
      if (m.class_names.empty()) m.class_names = j["classes"].get<std::vector<std::string>>();
      continue;
    }
    require(j.contains("graph") && j.contains("label"), Errc::parse_error, where + ": expected {graph, label}");
    ManifestEntry e;
    auto p = std::filesystem::path(j["graph"].get<std::string>());
    if (p.is_relative()) p = base / p;
    e.graph = p.lexically_normal().string();
    if (j["label"].is_string()) {
      const auto name = j["label"].get<std::string>();
      auto it = std::find(m.class_names.begin(), m.class_names.end(), name);
      require(it != m.class_names.end(), Errc::parse_error, where + ": unknown class '" + name + "'");
      e.label = static_cast<std::size_t>(it - m.class_names.begin());
    } else {
      require(j["label"].is_number_integer() && j["label"].get<long long>() >= 0, Errc::parse_error,
              where + ": label must be a non-negative integer or class name");
      e.label = j["label"].get<std::size_t>();
    }
    if (check_files)
      require(std::filesystem::exists(e.graph), Errc::io_error, where + ": missing graph file " + e.graph);
    m.entries.push_back(std::move(e));
  }
  if (m.class_names.empty()) {
    std::size_t c = 0;
    for (const auto& e : m.entries) c = std::max(c, e.label + 1);
    for (std::size_t k = 0; k < c; ++k) m.class_names.push_back("class" + std::to_string(k));
  }
  m.validate();
  return m;
}

/// Graph paths are written relative to the manifest's directory when they lie below it.
inline void save_manifest(const DatasetManifest& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot write manifest " + path);
  const auto base = std::filesystem::absolute(std::filesystem::path(path).parent_path());
  out << nlohmann::json{{"classes", m.class_names}}.dump() << "\n";
  for (const auto& e : m.entries) {
    auto rel = std::filesystem::absolute(e.graph).lexically_relative(base);
    const std::string g = rel.empty() || *rel.begin() == ".." ? e.graph : rel.string();
    out << nlohmann::json{{"graph", g}, {"label", e.label}}.dump() << "\n";
  }
}

/// Throws split_overlap if a graph file is listed in more than one split.
inline void check_disjoint(std::initializer_list<const DatasetManifest*> splits) {
  std::map<std::string, Split> seen;
  for (const auto* m : splits) {
    for (const auto& e : m->entries) {
      std::error_code ec;
      auto key = std::filesystem::weakly_canonical(e.graph, ec);
      const std::string k = ec ? e.graph : key.string();
      auto [it, fresh] = seen.emplace(k, m->split);
      if (!fresh && it->second != m->split)
        fail(Errc::split_overlap,
             e.graph + " appears in both " + to_string(it->second) + " and " + to_string(m->split) + " splits");
    }
  }
}

inline std::vector<graph::HactGraph> load_graphs(const DatasetManifest& m) {
  std::vector<graph::HactGraph> out;
  out.reserve(m.size());
  for (const auto& e : m.entries) out.push_back(graph::load_hact(e.graph));
  return out;
}

inline std::vector<std::size_t> labels_of(const DatasetManifest& m) {
  std::vector<std::size_t> l;
  for (const auto& e : m.entries) l.push_back(e.label);
  return l;
}

}  // namespace hact::pipeline
