#pragma once

#include <cmath>
#include <span>

#include "hact/core/error.hpp"
#include "hact/graph/entity_graph.hpp"

namespace hact::gnn {

/// Average log-scale node degree of a training corpus, used by the PNA scalers.
struct DeltaStats {
  double delta = 0.0;
  std::size_t sample_count = 0;
};

inline DeltaStats compute_delta(std::span<const graph::EntityGraph* const> graphs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto* g : graphs) {
    for (const auto d : g->degrees()) sum += std::log(static_cast<double>(d) + 1.0);
    n += g->node_count;
  }
  require(n > 0, Errc::invalid_argument, "compute_delta needs at least one node");
  DeltaStats s{sum / static_cast<double>(n), n};
  require(s.delta > 0.0, Errc::degenerate_delta, "every node is isolated: average log-degree is 0");
  return s;
}

}  // namespace hact::gnn
