#pragma once

#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"
#include "hact/nn/parameter.hpp"

namespace hact::nn {

/// Affine layer y = x W + b with W stored in x out.
struct Linear {
  Parameter weight;
  Parameter bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, Rng& rng)
      : weight(glorot_uniform(in, out, rng)), bias(Tensor::vector(out)) {}

  std::size_t in_dim() const noexcept { return weight.value.rows(); }
  std::size_t out_dim() const noexcept { return weight.value.cols(); }

  Tensor forward(const Tensor& x) const {
    if (x.cols() != in_dim())
      fail(Errc::shape_mismatch, "linear layer expects " + std::to_string(in_dim()) + " input features, got " +
                                     std::to_string(x.cols()));
    Tensor y = matmul(x, weight.value);
    const std::size_t d = out_dim();
    for (std::size_t r = 0; r < y.rows(); ++r) {
      double* row = y.row(r).data();
      for (std::size_t c = 0; c < d; ++c) row[c] += bias.value[c];
    }
    return y;
  }

  /// Accumulates parameter gradients; returns dL/dx.
  Tensor backward(const Tensor& x, const Tensor& dy) {
    add_inplace(weight.grad, matmul_tn(x, dy));
    for (std::size_t r = 0; r < dy.rows(); ++r) {
      auto row = dy.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) bias.grad[c] += row[c];
    }
    return matmul_nt(dy, weight.value);
  }

  void collect(const std::string& prefix, ParamList& out) {
    out.emplace_back(prefix + ".weight", &weight);
    out.emplace_back(prefix + ".bias", &bias);
  }
};

/// Stack of affine layers with ReLU between them and no activation on the output.
class Mlp {
 public:
  struct Cache {
    std::vector<Tensor> inputs;  // input to each layer
  };

  Mlp() = default;

  /// dims = {in, hidden..., out}; at least one layer.
  Mlp(const std::vector<std::size_t>& dims, Rng& rng) {
    require(dims.size() >= 2, Errc::invalid_argument, "an MLP needs at least one layer");
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) layers_.emplace_back(dims[i], dims[i + 1], rng);
  }

  /// Single layer computing the identity map on d features.
  static Mlp identity(std::size_t d) {
    Mlp m;
    Linear l;
    l.weight = Parameter(Tensor::matrix(d, d));
    for (std::size_t i = 0; i < d; ++i) l.weight.value(i, i) = 1.0;
    l.bias = Parameter(Tensor::vector(d));
    m.layers_.push_back(std::move(l));
    return m;
  }

  std::size_t in_dim() const noexcept { return layers_.front().in_dim(); }
  std::size_t out_dim() const noexcept { return layers_.back().out_dim(); }
  std::size_t depth() const noexcept { return layers_.size(); }
  std::vector<Linear>& layers() noexcept { return layers_; }
  const std::vector<Linear>& layers() const noexcept { return layers_; }

  Tensor forward(const Tensor& x, Cache* cache = nullptr) const {
    if (x.cols() != in_dim())
      fail(Errc::shape_mismatch, "MLP expects " + std::to_string(in_dim()) + " input features, got " +
                                     std::to_string(x.cols()));
    if (cache) cache->inputs.clear();
    Tensor h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      if (cache) cache->inputs.push_back(h);
      h = layers_[l].forward(h);
      if (l + 1 < layers_.size())
        for (auto& v : h.values()) v = v > 0.0 ? v : 0.0;
    }
    return h;
  }

  Tensor backward(const Cache& cache, const Tensor& dy) {
    Tensor g = dy;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      g = layers_[l].backward(cache.inputs[l], g);
      if (l > 0) {
        // inputs[l] is relu(pre-activation of layer l-1): positive exactly where the unit was active.
        const Tensor& act = cache.inputs[l];
        for (std::size_t i = 0; i < g.size(); ++i)
          if (!(act[i] > 0.0)) g[i] = 0.0;
      }
    }
    return g;
  }

  void collect(const std::string& prefix, ParamList& out) {
    for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].collect(prefix + "." + std::to_string(l), out);
  }

 private:
  std::vector<Linear> layers_;
};

}  // namespace hact::nn
