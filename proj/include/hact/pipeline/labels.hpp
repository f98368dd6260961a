#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/pipeline/manifest.hpp"

namespace hact::pipeline {

/// Fine-grained BRACS-style classes in label-id order.
inline const std::vector<std::string>& bracs_classes() {
  static const std::vector<std::string> names = {"Normal", "Benign", "UDH", "ADH", "FEA", "DCIS", "Invasive"};
  return names;
}

enum Bracs : std::size_t { normal, benign, udh, adh, fea, dcis, invasive };

/// Fine label id -> task label id, or nullopt for classes the task ignores.
struct LabelMap {
  std::string name;
  std::vector<std::optional<std::size_t>> mapping;
  std::vector<std::string> task_classes;

  void validate() const {
    std::vector<bool> hit(task_classes.size(), false);
    for (const auto& t : mapping)
      if (t) {
        require(*t < task_classes.size(), Errc::out_of_bounds, name + ": target label out of range");
        hit[*t] = true;
      }
    for (std::size_t k = 0; k < hit.size(); ++k)
      require(hit[k], Errc::invalid_argument, name + ": no fine class maps to '" + task_classes[k] + "'");
  }
};

inline LabelMap identity_map(const std::vector<std::string>& classes) {
  LabelMap m{"identity", {}, classes};
  for (std::size_t k = 0; k < classes.size(); ++k) m.mapping.emplace_back(k);
  return m;
}

/// Normal | Benign+UDH | ADH+FEA | DCIS+Invasive.
inline LabelMap seven_to_four() {
  return {"7to4",
          {0, 1, 1, 2, 2, 3, 3},
          {"Normal", "Non-cancerous", "Precancerous", "Cancerous"}};
}

inline const std::vector<std::string>& binary_task_names() {
  static const std::vector<std::string> names = {"I-vs-NBUAFD", "NBU-vs-AFD", "N-vs-BU", "B-vs-U", "AF-vs-D", "A-vs-F"};
  return names;
}

/// Binary tasks of the diagnostic decision tree. Class 0 is the group named
/// first; classes off the task's branch are excluded.
inline LabelMap binary_task(const std::string& name) {
  using O = std::optional<std::size_t>;
  const O x = std::nullopt;
  if (name == "I-vs-NBUAFD") return {name, {1, 1, 1, 1, 1, 1, 0}, {"Invasive", "Non-invasive"}};
  if (name == "NBU-vs-AFD") return {name, {0, 0, 0, 1, 1, 1, x}, {"Non-atypical", "Atypical+DCIS"}};
  if (name == "N-vs-BU") return {name, {0, 1, 1, x, x, x, x}, {"Normal", "Benign+UDH"}};
  if (name == "B-vs-U") return {name, {x, 0, 1, x, x, x, x}, {"Benign", "UDH"}};
  if (name == "AF-vs-D") return {name, {x, x, x, 0, 0, 1, x}, {"ADH+FEA", "DCIS"}};
  if (name == "A-vs-F") return {name, {x, x, x, 0, 1, x, x}, {"ADH", "FEA"}};
  fail(Errc::invalid_argument, "unknown binary task '" + name + "'");
}

/// "identity", "7to4" or a binary task name.
inline LabelMap label_map_by_name(const std::string& name, const std::vector<std::string>& classes) {
  if (name == "identity") return identity_map(classes);
  if (name == "7to4") return seven_to_four();
  return binary_task(name);
}

/// Relabels every entry; entries whose class the map excludes are dropped.
inline DatasetManifest apply_label_map(const LabelMap& map, const DatasetManifest& in) {
  map.validate();
  DatasetManifest out;
  out.split = in.split;
  out.class_names = map.task_classes;
  for (const auto& e : in.entries) {
    require(e.label < map.mapping.size(), Errc::invalid_argument,
            map.name + ": label " + std::to_string(e.label) + " is not covered by the map");
    if (const auto t = map.mapping[e.label]) out.entries.push_back({e.graph, *t});
  }
  return out;
}

}  // namespace hact::pipeline
