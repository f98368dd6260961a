#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"

namespace hact::nn {

struct LossResult {
  double loss = 0.0;
  Tensor grad;  // dL/dlogits, same shape as the logits
};

/// Row-wise softmax of a logits matrix.
inline Tensor softmax(const Tensor& logits) {
  Tensor p = logits;
  for (std::size_t r = 0; r < p.rows(); ++r) {
    auto row = p.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (auto& v : row) s += (v = std::exp(v - m));
    for (auto& v : row) v /= s;
  }
  return p;
}

/// Mean negative log-likelihood of the true class under a softmax.
inline LossResult softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels) {
  const std::size_t n = logits.rows(), c = logits.cols();
  require(labels.size() == n, Errc::shape_mismatch,
          "cross-entropy: " + std::to_string(labels.size()) + " labels for " + std::to_string(n) + " rows");
  require(n >= 1 && c >= 1, Errc::invalid_argument, "cross-entropy needs a non-empty logits matrix");
  LossResult out;
  out.grad = Tensor::matrix(n, c);
  for (std::size_t r = 0; r < n; ++r) {
    if (labels[r] >= c)
      fail(Errc::invalid_argument, "label " + std::to_string(labels[r]) + " out of range for " + std::to_string(c) + " classes");
    auto row = logits.row(r);
    const double m = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - m);
    const double lse = m + std::log(s);
    out.loss += lse - row[labels[r]];
    for (std::size_t k = 0; k < c; ++k) out.grad(r, k) = std::exp(row[k] - lse) / static_cast<double>(n);
    out.grad(r, labels[r]) -= 1.0 / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);
  return out;
}

}  // namespace hact::nn
