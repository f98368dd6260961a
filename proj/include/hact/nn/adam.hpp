#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/nn/parameter.hpp"

namespace hact::nn {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update of every parameter from its `grad`.
/// Gradients are checked before anything is modified.
inline void adam_step(AdamState& st, const ParamList& params) {
  for (const auto& [name, p] : params) {
    if (p->grad.shape() != p->value.shape())
      fail(Errc::shape_mismatch, "gradient of " + name + " has shape " + p->grad.shape_string() + ", parameter " +
                                     p->value.shape_string());
    if (!p->grad.all_finite()) fail(Errc::non_finite, "non-finite gradient in parameter " + name);
  }
  if (st.m.empty()) {
    for (const auto& [name, p] : params) {
      st.m.emplace_back(p->value.shape());
      st.v.emplace_back(p->value.shape());
    }
  }
  require(st.m.size() == params.size(), Errc::shape_mismatch, "optimizer state does not match the parameter list");
  ++st.step;
  const double t = static_cast<double>(st.step);
  const double c1 = 1.0 - std::pow(st.beta1, t), c2 = 1.0 - std::pow(st.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = *params[i].second;
    Tensor& m = st.m[i];
    Tensor& v = st.v[i];
    require(m.shape() == p.value.shape(), Errc::shape_mismatch, "optimizer moment shape differs for " + params[i].first);
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      m[k] = st.beta1 * m[k] + (1.0 - st.beta1) * g;
      v[k] = st.beta2 * v[k] + (1.0 - st.beta2) * g * g;
      p.value[k] -= st.lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + st.eps);
    }
  }
}

}  // namespace hact::nn
