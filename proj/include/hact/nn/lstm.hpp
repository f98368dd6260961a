#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"
#include "hact/nn/parameter.hpp"

namespace hact::nn {

/// Single-layer LSTM run over a short sequence of node-feature matrices
/// (all rows processed independently). Gate order in the packed weights is
/// input, forget, cell, output. Returns the final hidden state.
class Lstm {
 public:
  struct Step {
    Tensor x, h_prev, c_prev;
    Tensor i, f, g, o, tanh_c;
  };
  struct Cache {
    std::vector<Step> steps;
  };

  Lstm() = default;
  Lstm(std::size_t input, std::size_t hidden, Rng& rng)
      : wx_(glorot_uniform(input, 4 * hidden, rng)),
        wh_(glorot_uniform(hidden, 4 * hidden, rng)),
        b_(Tensor::vector(4 * hidden)),
        hidden_(hidden) {}

  std::size_t input_dim() const noexcept { return wx_.value.rows(); }
  std::size_t hidden_dim() const noexcept { return hidden_; }

  Tensor forward(std::span<const Tensor> seq, Cache* cache = nullptr) const {
    require(!seq.empty(), Errc::invalid_argument, "LSTM needs a non-empty sequence");
    const std::size_t n = seq.front().rows(), hd = hidden_;
    Tensor h = Tensor::matrix(n, hd), c = Tensor::matrix(n, hd);
    if (cache) cache->steps.clear();
    for (const Tensor& x : seq) {
      if (x.rows() != n || x.cols() != input_dim())
        fail(Errc::shape_mismatch, "LSTM step input " + x.shape_string() + ", expected " + std::to_string(n) +
                                       "x" + std::to_string(input_dim()));
      Tensor z = matmul(x, wx_.value);
      add_inplace(z, matmul(h, wh_.value));
      Step s;
      s.i = Tensor::matrix(n, hd);
      s.f = Tensor::matrix(n, hd);
      s.g = Tensor::matrix(n, hd);
      s.o = Tensor::matrix(n, hd);
      s.tanh_c = Tensor::matrix(n, hd);
      Tensor c_new = Tensor::matrix(n, hd), h_new = Tensor::matrix(n, hd);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < hd; ++k) {
          const double ai = z(r, k) + b_.value[k];
          const double af = z(r, hd + k) + b_.value[hd + k];
          const double ag = z(r, 2 * hd + k) + b_.value[2 * hd + k];
          const double ao = z(r, 3 * hd + k) + b_.value[3 * hd + k];
          const double i = sigmoid(ai), f = sigmoid(af), g = std::tanh(ag), o = sigmoid(ao);
          const double cv = f * c(r, k) + i * g;
          const double tc = std::tanh(cv);
          s.i(r, k) = i;
          s.f(r, k) = f;
          s.g(r, k) = g;
          s.o(r, k) = o;
          s.tanh_c(r, k) = tc;
          c_new(r, k) = cv;
          h_new(r, k) = o * tc;
        }
      if (cache) {
        s.x = x;
        s.h_prev = h;
        s.c_prev = c;
        cache->steps.push_back(std::move(s));
      }
      h = std::move(h_new);
      c = std::move(c_new);
    }
    return h;
  }

  /// Backpropagation through time from the gradient of the final hidden
  /// state; returns the gradient for every sequence element.
  std::vector<Tensor> backward(const Cache& cache, const Tensor& dh_final) {
    const std::size_t hd = hidden_;
    const std::size_t n = dh_final.rows();
    std::vector<Tensor> dx(cache.steps.size());
    Tensor dh = dh_final, dc = Tensor::matrix(n, hd);
    for (std::size_t t = cache.steps.size(); t-- > 0;) {
      const Step& s = cache.steps[t];
      Tensor dz = Tensor::matrix(n, 4 * hd);
      Tensor dc_prev = Tensor::matrix(n, hd);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < hd; ++k) {
          const double i = s.i(r, k), f = s.f(r, k), g = s.g(r, k), o = s.o(r, k), tc = s.tanh_c(r, k);
          const double dhv = dh(r, k);
          const double dcv = dc(r, k) + dhv * o * (1.0 - tc * tc);
          dz(r, k) = dcv * g * i * (1.0 - i);
          dz(r, hd + k) = dcv * s.c_prev(r, k) * f * (1.0 - f);
          dz(r, 2 * hd + k) = dcv * i * (1.0 - g * g);
          dz(r, 3 * hd + k) = dhv * tc * o * (1.0 - o);
          dc_prev(r, k) = dcv * f;
        }
      add_inplace(wx_.grad, matmul_tn(s.x, dz));
      add_inplace(wh_.grad, matmul_tn(s.h_prev, dz));
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t k = 0; k < 4 * hd; ++k) b_.grad[k] += dz(r, k);
      dx[t] = matmul_nt(dz, wx_.value);
      dh = matmul_nt(dz, wh_.value);
      dc = std::move(dc_prev);
    }
    return dx;
  }

  void collect(const std::string& prefix, ParamList& out) {
    out.emplace_back(prefix + ".w_input", &wx_);
    out.emplace_back(prefix + ".w_hidden", &wh_);
    out.emplace_back(prefix + ".bias", &b_);
  }

 private:
  static double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

  Parameter wx_, wh_, b_;
  std::size_t hidden_ = 0;
};

}  // namespace hact::nn
