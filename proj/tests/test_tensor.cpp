#include <gtest/gtest.h>

#include "hact/core/error.hpp"
#include "hact/core/rng.hpp"
#include "hact/core/tensor.hpp"

using namespace hact;

namespace {

Tensor random_matrix(std::size_t r, std::size_t c, Rng& rng) {
  Tensor t = Tensor::matrix(r, c);
  for (auto& v : t.values()) v = rng.normal();
  return t;
}

Tensor naive_matmul(const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::matrix(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t k = 0; k < a.cols(); ++k) out(i, j) += a(i, k) * b(k, j);
  return out;
}

Tensor transpose(const Tensor& a) {
  Tensor t = Tensor::matrix(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

}  // namespace

TEST(Tensor, ShapeAndIndexing) {
  Tensor t({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  EXPECT_EQ(t(1, 2), 6.0);
  EXPECT_EQ(t.row(1)[0], 4.0);
  EXPECT_EQ(t.shape_string(), "[2x3]");
  EXPECT_EQ(Tensor::vector(4).cols(), 1u);
}

TEST(Tensor, ValueCountMustMatchShape) {
  try {
    Tensor t({2, 2}, std::vector<double>{1, 2, 3});
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::shape_mismatch);
  }
}

TEST(Tensor, MatmulVariantsMatchNaiveProduct) {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = 1 + rng.index(7), k = 1 + rng.index(7), n = 1 + rng.index(7);
    const Tensor a = random_matrix(m, k, rng), b = random_matrix(k, n, rng);
    EXPECT_LT(max_abs_diff(matmul(a, b), naive_matmul(a, b)), 1e-12);
    EXPECT_LT(max_abs_diff(matmul_tn(transpose(a), b), naive_matmul(a, b)), 1e-12);
    EXPECT_LT(max_abs_diff(matmul_nt(a, transpose(b)), naive_matmul(a, b)), 1e-12);
  }
}

TEST(Tensor, MatmulRejectsInnerMismatch) {
  EXPECT_THROW(matmul(Tensor::matrix(2, 3), Tensor::matrix(2, 3)), Error);
}

TEST(Tensor, ConcatAndSliceRoundTrip) {
  Rng rng(5);
  const Tensor a = random_matrix(4, 2, rng), b = random_matrix(4, 3, rng);
  const Tensor c = hconcat(a, b);
  EXPECT_EQ(c.cols(), 5u);
  EXPECT_EQ(slice_cols(c, 0, 2), a);
  EXPECT_EQ(slice_cols(c, 2, 3), b);
}

TEST(Tensor, AddAndScale) {
  Tensor a({2}, std::vector<double>{1, 2});
  add_inplace(a, Tensor({2}, std::vector<double>{3, 4}));
  EXPECT_EQ(a, Tensor({2}, std::vector<double>{4, 6}));
  EXPECT_EQ(scaled(a, 0.5), Tensor({2}, std::vector<double>{2, 3}));
}

TEST(Tensor, FiniteCheck) {
  Tensor a = Tensor::matrix(2, 2);
  EXPECT_TRUE(a.all_finite());
  a(1, 1) = std::nan("");
  EXPECT_FALSE(a.all_finite());
}

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    EXPECT_EQ(x, b.uniform());
    differs = differs || x != c.uniform();
  }
  EXPECT_TRUE(differs);
}

TEST(Rng, UniformAndIndexRanges) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(rng.index(7), 7u);
  }
}

TEST(Rng, NormalMoments) {
  Rng rng(9);
  double s = 0, s2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.03);
  EXPECT_NEAR(s2 / n, 1.0, 0.05);
}

TEST(Rng, ShuffleIsPermutation) {
  Rng rng(2);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}
