#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hact/core/error.hpp"
#include "hact/core/tensor.hpp"
#include "hact/nn/parameter.hpp"

namespace hact::nn {

enum class Mode { train, eval };

/// Divides every row by sqrt(node_count).
inline Tensor graph_norm(const Tensor& x, std::size_t node_count) {
  require(node_count >= 1, Errc::invalid_argument, "graph_norm needs node_count >= 1");
  return scaled(x, 1.0 / std::sqrt(static_cast<double>(node_count)));
}

/// Batched form: rows are grouped by graph, graph g owning sizes[g]
/// consecutive rows. Being linear, its backward is the same map.
inline Tensor graph_norm(const Tensor& x, std::span<const std::size_t> sizes) {
  Tensor out = x;
  std::size_t r = 0;
  for (const std::size_t n : sizes) {
    if (n == 0) continue;
    const double s = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i, ++r)
      for (auto& v : out.row(r)) v *= s;
  }
  require(r == x.rows(), Errc::shape_mismatch, "graph_norm: graph sizes do not cover the rows");
  return out;
}

/// Per-feature batch normalisation with learnable scale and shift.
/// Running statistics follow running = momentum * running + (1 - momentum) * batch,
/// with the unbiased batch variance.
class BatchNorm {
 public:
  static constexpr double kEps = 1e-5;
  static constexpr double kMomentum = 0.9;

  struct Cache {
    Tensor xhat;
    std::vector<double> inv_std;
  };

  BatchNorm() = default;
  explicit BatchNorm(std::size_t d)
      : gamma_(Tensor::vector(d, 1.0)), beta_(Tensor::vector(d)), mean_(Tensor::vector(d)), var_(Tensor::vector(d, 1.0)) {}

  std::size_t dim() const noexcept { return gamma_.value.size(); }
  Parameter& gamma() noexcept { return gamma_; }
  Parameter& beta() noexcept { return beta_; }
  Tensor& running_mean() noexcept { return mean_; }
  Tensor& running_var() noexcept { return var_; }

  Tensor forward(const Tensor& x, Mode mode, Cache* cache = nullptr) {
    const std::size_t n = x.rows(), d = dim();
    if (x.cols() != d)
      fail(Errc::shape_mismatch, "batch_norm expects " + std::to_string(d) + " features, got " + std::to_string(x.cols()));
    Tensor out = Tensor::matrix(n, d);
    std::vector<double> mu(d, 0.0), inv(d, 0.0);
    if (mode == Mode::train) {
      require(n >= 2, Errc::invalid_argument, "batch_norm in train mode needs at least 2 rows");
      std::vector<double> var(d, 0.0);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) mu[c] += x(r, c);
      for (auto& m : mu) m /= static_cast<double>(n);
      for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < d; ++c) {
          const double e = x(r, c) - mu[c];
          var[c] += e * e;
        }
      for (std::size_t c = 0; c < d; ++c) {
        var[c] /= static_cast<double>(n);
        inv[c] = 1.0 / std::sqrt(var[c] + kEps);
        mean_[c] = kMomentum * mean_[c] + (1.0 - kMomentum) * mu[c];
        var_[c] = kMomentum * var_[c] + (1.0 - kMomentum) * var[c] * static_cast<double>(n) / static_cast<double>(n - 1);
      }
    } else {
      for (std::size_t c = 0; c < d; ++c) {
        mu[c] = mean_[c];
        inv[c] = 1.0 / std::sqrt(var_[c] + kEps);
      }
    }
    Tensor xhat = Tensor::matrix(n, d);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < d; ++c) {
        xhat(r, c) = (x(r, c) - mu[c]) * inv[c];
        out(r, c) = gamma_.value[c] * xhat(r, c) + beta_.value[c];
      }
    if (cache) {
      cache->xhat = std::move(xhat);
      cache->inv_std = std::move(inv);
    }
    return out;
  }

  /// `mode` must match the forward call that filled `cache`.
  Tensor backward(const Cache& cache, const Tensor& dy, Mode mode) {
    const std::size_t n = dy.rows(), d = dim();
    Tensor dx = Tensor::matrix(n, d);
    for (std::size_t c = 0; c < d; ++c) {
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        sum_dy += dy(r, c);
        sum_dy_xhat += dy(r, c) * cache.xhat(r, c);
      }
      gamma_.grad[c] += sum_dy_xhat;
      beta_.grad[c] += sum_dy;
      const double g = gamma_.value[c], inv = cache.inv_std[c];
      if (mode == Mode::train) {
        const double nn = static_cast<double>(n);
        for (std::size_t r = 0; r < n; ++r)
          dx(r, c) = g * inv / nn * (nn * dy(r, c) - sum_dy - cache.xhat(r, c) * sum_dy_xhat);
      } else {
        for (std::size_t r = 0; r < n; ++r) dx(r, c) = g * inv * dy(r, c);
      }
    }
    return dx;
  }

  void collect(const std::string& prefix, ParamList& out) {
    out.emplace_back(prefix + ".gamma", &gamma_);
    out.emplace_back(prefix + ".beta", &beta_);
  }
  void collect_buffers(const std::string& prefix, BufferList& out) {
    out.emplace_back(prefix + ".running_mean", &mean_);
    out.emplace_back(prefix + ".running_var", &var_);
  }

 private:
  Parameter gamma_, beta_;
  Tensor mean_, var_;
};

}  // namespace hact::nn
