#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "hact/core/error.hpp"

namespace hact {

/// Dense row-major float64 array. Almost everything in the network is a
/// matrix (rows = nodes or graphs, cols = channels); 1-D tensors are used for
/// bias vectors and per-feature statistics.
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> shape, double fill = 0.0)
      : shape_(std::move(shape)), data_(count(shape_), fill) {}

  Tensor(std::vector<std::size_t> shape, std::vector<double> values)
      : shape_(std::move(shape)), data_(std::move(values)) {
    require(data_.size() == count(shape_), Errc::shape_mismatch,
            "tensor value count " + std::to_string(data_.size()) + " does not match shape " +
                shape_string(shape_));
  }

  static Tensor matrix(std::size_t rows, std::size_t cols, double fill = 0.0) {
    return Tensor({rows, cols}, fill);
  }
  static Tensor vector(std::size_t n, double fill = 0.0) { return Tensor({n}, fill); }

  const std::vector<std::size_t>& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t rows() const noexcept { return shape_.empty() ? 0 : shape_[0]; }
  std::size_t cols() const noexcept {
    if (shape_.size() < 2) return shape_.empty() ? 0 : 1;
    return shape_[1];
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::vector<double>& storage() noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols(), cols()};
  }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  void zero() { fill(0.0); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

  static std::size_t count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  static std::string shape_string(const std::vector<std::size_t>& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
      if (i) s += "x";
      s += std::to_string(shape[i]);
    }
    return s + "]";
  }
  std::string shape_string() const { return shape_string(shape_); }

 private:
  std::vector<std::size_t> shape_;
  std::vector<double> data_;
};

namespace detail {
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMat>;
using ConstMatMap = Eigen::Map<const RowMat>;

inline ConstMatMap view(const Tensor& t) {
  return ConstMatMap(t.data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}
inline MatMap view(Tensor& t) {
  return MatMap(t.data(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
}  // namespace detail

inline void check_shape(const Tensor& t, std::size_t rows, std::size_t cols, const char* what) {
  if (t.rows() != rows || t.cols() != cols)
    fail(Errc::shape_mismatch, std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                   std::to_string(cols) + ", got " + t.shape_string());
}

/// a · b
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.rows())
    fail(Errc::shape_mismatch, "matmul: " + a.shape_string() + " x " + b.shape_string());
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  if (out.size()) detail::view(out).noalias() = detail::view(a) * detail::view(b);
  return out;
}

/// aᵀ · b
inline Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows() != b.rows())
    fail(Errc::shape_mismatch, "matmul_tn: " + a.shape_string() + " x " + b.shape_string());
  Tensor out = Tensor::matrix(a.cols(), b.cols());
  if (out.size() && a.rows()) detail::view(out).noalias() = detail::view(a).transpose() * detail::view(b);
  return out;
}

/// a · bᵀ
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols() != b.cols())
    fail(Errc::shape_mismatch, "matmul_nt: " + a.shape_string() + " x " + b.shape_string());
  Tensor out = Tensor::matrix(a.rows(), b.rows());
  if (out.size() && a.cols()) detail::view(out).noalias() = detail::view(a) * detail::view(b).transpose();
  return out;
}

inline void add_inplace(Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape())
    fail(Errc::shape_mismatch, "add: " + a.shape_string() + " vs " + b.shape_string());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

inline Tensor scaled(const Tensor& a, double s) {
  Tensor out = a;
  for (auto& v : out.values()) v *= s;
  return out;
}

/// Horizontal concatenation of matrices with equal row counts.
inline Tensor hconcat(std::span<const Tensor* const> parts) {
  if (parts.empty()) return {};
  const std::size_t n = parts.front()->rows();
  std::size_t total = 0;
  for (const Tensor* p : parts) {
    if (p->rows() != n)
      fail(Errc::shape_mismatch, "hconcat: row counts differ (" + std::to_string(n) + " vs " +
                                     std::to_string(p->rows()) + ")");
    total += p->cols();
  }
  Tensor out = Tensor::matrix(n, total);
  for (std::size_t r = 0; r < n; ++r) {
    double* dst = out.row(r).data();
    for (const Tensor* p : parts) {
      auto src = p->row(r);
      dst = std::copy(src.begin(), src.end(), dst);
    }
  }
  return out;
}

inline Tensor hconcat(const Tensor& a, const Tensor& b) {
  const Tensor* parts[] = {&a, &b};
  return hconcat(parts);
}

/// Columns [begin, begin + width) of a matrix.
inline Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t width) {
  if (begin + width > a.cols()) fail(Errc::shape_mismatch, "slice_cols out of range");
  Tensor out = Tensor::matrix(a.rows(), width);
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto src = a.row(r).subspan(begin, width);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) fail(Errc::shape_mismatch, "max_abs_diff shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace hact
