#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"

namespace hact::nn {

/// Trainable tensor with its accumulated gradient.
struct Parameter {
  Tensor value;
  Tensor grad;

  Parameter() = default;
  explicit Parameter(Tensor v) : value(std::move(v)), grad(value.shape()) {}

  void zero_grad() { grad = Tensor(value.shape()); }
};

/// Named, ordered view of a model's parameters; the order is stable and
/// defines the layout of optimizer state and checkpoints.
using ParamList = std::vector<std::pair<std::string, Parameter*>>;

/// Non-trainable state (e.g. running statistics) that still belongs in a checkpoint.
using BufferList = std::vector<std::pair<std::string, Tensor*>>;

/// Glorot/Xavier uniform initialisation for an in x out weight matrix.
inline Tensor glorot_uniform(std::size_t in, std::size_t out, Rng& rng) {
  Tensor w = Tensor::matrix(in, out);
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  for (auto& v : w.values()) v = rng.uniform(-limit, limit);
  return w;
}

inline void zero_grads(const ParamList& params) {
  for (auto& [name, p] : params) p->zero_grad();
}

}  // namespace hact::nn
