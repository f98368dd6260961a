#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "hact/core/rng.hpp"
#include "hact/graph/assemble.hpp"
#include "support/oracles.hpp"

using namespace hact;
using namespace hact::graph;

namespace {

std::vector<Point> random_points(Rng& rng, std::size_t n, double extent) {
  std::vector<Point> p(n);
  for (auto& q : p) q = {rng.uniform(0, extent), rng.uniform(0, extent)};
  return p;
}

hact::testing::EdgeSet as_set(const EdgeList& e) { return {e.begin(), e.end()}; }

entity::SuperpixelMap quadrants(std::size_t w, std::size_t h) {
  entity::SuperpixelMap m;
  m.labels = LabelImage(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) m.labels.at(x, y) = (y >= h / 2 ? 2u : 0u) + (x >= w / 2 ? 1u : 0u);
  m.region_count = 4;
  return m;
}

std::vector<Pixel> disk(int r, int cx = 0, int cy = 0) {
  std::vector<Pixel> out;
  for (int y = -r; y <= r; ++y)
    for (int x = -r; x <= r; ++x)
      if (x * x + y * y <= r * r) out.push_back({cx + x, cy + y});
  return out;
}

}  // namespace

TEST(CellTopology, MatchesBruteForce) {
  Rng rng(11);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + rng.index(80);
    const auto pts = random_points(rng, n, 300);
    const std::size_t k = 1 + rng.index(8);
    const double d_min = rng.uniform(5, 120);
    EXPECT_EQ(as_set(build_cell_topology(pts, k, d_min)), hact::testing::brute_knn_edges(pts, k, d_min)) << "trial " << t;
  }
}

TEST(CellTopology, ThresholdDropsFarNeighbour) {
  const std::vector<Point> pts{{0, 0}, {10, 0}, {1000, 0}};
  EXPECT_EQ(build_cell_topology(pts, 2, 50), (EdgeList{{0, 1}}));
}

TEST(CellTopology, SingleNodeAndLargeK) {
  const std::vector<Point> one{{3, 3}};
  EXPECT_TRUE(build_cell_topology(one, 5, 50).empty());
  const std::vector<Point> three{{0, 0}, {1, 0}, {0, 1}};
  EXPECT_EQ(build_cell_topology(three, 10, 50), (EdgeList{{0, 1}, {0, 2}, {1, 2}}));
  EXPECT_TRUE(build_cell_topology(std::vector<Point>{}, 5, 50).empty());
}

TEST(CellTopology, TiesBrokenByLowerId) {
  // nodes 1 and 2 are equidistant from 0; k=1 picks node 1
  const std::vector<Point> pts{{0, 0}, {5, 0}, {-5, 0}};
  const auto e = build_cell_topology(pts, 1, 100);
  EXPECT_TRUE(as_set(e).count({0, 1}));
  EXPECT_EQ(as_set(e), hact::testing::brute_knn_edges(pts, 1, 100));
}

TEST(CellTopology, EdgesAreCanonical) {
  Rng rng(2);
  const auto pts = random_points(rng, 60, 200);
  const auto e = build_cell_topology(pts, 5, 60);
  EXPECT_TRUE(std::is_sorted(e.begin(), e.end()));
  for (const auto& [a, b] : e) EXPECT_LT(a, b);
}

TEST(TissueTopology, MatchesPixelScan) {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    entity::SuperpixelMap m;
    m.labels = LabelImage(1 + rng.index(32), 1 + rng.index(32));
    m.region_count = static_cast<std::uint32_t>(1 + rng.index(6));
    for (auto& l : m.labels.labels) l = static_cast<std::uint32_t>(rng.index(m.region_count));
    EXPECT_EQ(as_set(build_tissue_topology(m)), hact::testing::brute_rag(m.labels)) << "trial " << t;
  }
}

TEST(TissueTopology, SmallExamples) {
  entity::SuperpixelMap two;
  two.labels = LabelImage(2, 1);
  two.labels.at(1, 0) = 1;
  two.region_count = 2;
  EXPECT_EQ(build_tissue_topology(two), (EdgeList{{0, 1}}));

  entity::SuperpixelMap one;
  one.labels = LabelImage(4, 4);
  one.region_count = 1;
  EXPECT_TRUE(build_tissue_topology(one).empty());

  entity::SuperpixelMap centre;
  centre.labels = LabelImage(3, 3);
  centre.labels.at(1, 1) = 1;
  centre.region_count = 2;
  EXPECT_EQ(build_tissue_topology(centre), (EdgeList{{0, 1}}));

  // diagonal contact is not adjacency
  entity::SuperpixelMap diag;
  diag.labels = LabelImage(2, 2);
  diag.labels.at(1, 0) = 1;
  diag.labels.at(0, 1) = 2;
  diag.labels.at(1, 1) = 3;
  diag.region_count = 4;
  EXPECT_EQ(build_tissue_topology(diag), (EdgeList{{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
}

TEST(Glcm, MatchesBruteForce) {
  Rng rng(8);
  const std::vector<std::array<int, 2>> offs(kGlcmOffsets.begin(), kGlcmOffsets.end());
  for (int t = 0; t < 20; ++t) {
    const std::size_t w = 1 + rng.index(12), h = 1 + rng.index(12);
    std::vector<std::uint8_t> g(w * h);
    for (auto& v : g) v = static_cast<std::uint8_t>(rng.index(256));
    const auto got = glcm_features(g, w, h);
    const auto ref = hact::testing::brute_glcm(g, w, h, kGlcmLevels, offs);
    EXPECT_NEAR(got.dissimilarity, ref.dissimilarity, 1e-12);
    EXPECT_NEAR(got.homogeneity, ref.homogeneity, 1e-12);
    EXPECT_NEAR(got.energy, ref.energy, 1e-12);
    EXPECT_NEAR(got.asm_, ref.asm_, 1e-12);
  }
}

TEST(Glcm, ConstantPatch) {
  const std::vector<std::uint8_t> g(25, 140);
  const auto f = glcm_features(g, 5, 5);
  EXPECT_DOUBLE_EQ(f.homogeneity, 1.0);
  EXPECT_DOUBLE_EQ(f.dissimilarity, 0.0);
  EXPECT_DOUBLE_EQ(f.energy, 1.0);
}

TEST(Glcm, StripesAlongRows) {
  // columns alternate between levels 0 and 31: horizontal pairs differ by 31
  std::vector<std::uint8_t> g(16);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = (i % 4) % 2 ? 255 : 0;
  const auto f = glcm_features(g, 4, 4);
  // offsets (0,1) and (1,1), (1,-1) all cross a column boundary; (1,0) does not
  EXPECT_NEAR(f.dissimilarity, 31.0 * 3 / 4, 1e-12);
}

TEST(Glcm, SizeMismatchThrows) {
  const std::vector<std::uint8_t> g(5);
  EXPECT_THROW(glcm_features(g, 2, 2), Error);
}

TEST(Shape, DiskIsRoundAndSolid) {
  const auto f = shape_features(disk(20));
  EXPECT_LT(f.eccentricity, 0.05);
  EXPECT_GT(f.solidity, 0.95);
  EXPECT_NEAR(f.major_axis, 40.0, 1.0);
  EXPECT_NEAR(f.minor_axis, 40.0, 1.0);
}

TEST(Shape, ScalingByTwo) {
  const std::vector<Pixel> base{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {0, 1}, {1, 1}, {2, 2}};
  std::vector<Pixel> big;
  for (const auto& p : base)
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) big.push_back({2 * p.x + dx, 2 * p.y + dy});
  const auto a = shape_features(base), b = shape_features(big);
  EXPECT_DOUBLE_EQ(b.area, 4 * a.area);
  EXPECT_NEAR(b.perimeter, 2 * a.perimeter, 1e-12);
}

TEST(Shape, Elongated) {
  std::vector<Pixel> bar;
  for (int x = 0; x < 40; ++x)
    for (int y = 0; y < 2; ++y) bar.push_back({x, y});
  const auto f = shape_features(bar);
  EXPECT_GT(f.eccentricity, 0.99);
  EXPECT_NEAR(f.orientation, 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(f.perimeter, 2 * 40 + 2 * 2);
  EXPECT_NEAR(f.solidity, 1.0, 1e-12);
}

TEST(Shape, SinglePixel) {
  const std::vector<Pixel> one{{4, 7}};
  const auto f = shape_features(one);
  EXPECT_EQ(f.area, 1);
  EXPECT_EQ(f.eccentricity, 0);
  EXPECT_EQ(f.perimeter, 0);
  EXPECT_THROW(shape_features(std::vector<Pixel>{}), Error);
}

TEST(Spatial, NormalisedCentroid) {
  const auto a = spatial_features({10, 5}, 20, 10);
  EXPECT_DOUBLE_EQ(a[0], 0.5);
  EXPECT_DOUBLE_EQ(a[1], 0.5);
  const auto b = spatial_features({19, 9}, 20, 10);
  EXPECT_DOUBLE_EQ(b[0], 0.95);
  EXPECT_DOUBLE_EQ(b[1], 0.9);
  EXPECT_THROW(spatial_features({-1, 0}, 20, 10), Error);
}

TEST(RegionAverage, MeanOfMembers) {
  Tensor sp({3, 2}, std::vector<double>{0, 2, 2, 0, 7, 7});
  const auto out = region_feature_average(sp, {{0, 1}, {2}});
  EXPECT_DOUBLE_EQ(out(0, 0), 1);
  EXPECT_DOUBLE_EQ(out(0, 1), 1);
  EXPECT_DOUBLE_EQ(out(1, 0), 7);
  EXPECT_THROW(region_feature_average(sp, {{}}), Error);
  EXPECT_THROW(region_feature_average(sp, {{5}}), Error);
}

TEST(Assignment, CentroidContainment) {
  const auto m = quadrants(20, 20);
  entity::NucleiSet n;
  n.centroids = {{2, 2}, {15, 3}, {4, 17}, {18, 18}, {9.4, 9.4}};
  EXPECT_EQ(build_assignment(n, m), (std::vector<std::uint32_t>{0, 1, 2, 3, 0}));
  n.centroids.push_back({25, 1});
  EXPECT_THROW(build_assignment(n, m), Error);
}

TEST(Assignment, LargestOverlapWins) {
  entity::SuperpixelMap m;
  m.labels = LabelImage(10, 1);
  for (std::size_t x = 6; x < 10; ++x) m.labels.at(x, 0) = 1;
  m.region_count = 2;
  entity::NucleiSet n;
  n.centroids = {{8, 0}};  // centroid sits in region 1
  n.instance_labels = LabelImage(10, 1, 1);
  EXPECT_EQ(build_assignment(n, m), (std::vector<std::uint32_t>{0}));
}

TEST(Assemble, FeatureModeNone) {
  RgbImage img(40, 40, 200);
  TissueSegmentation seg{quadrants(40, 40), quadrants(40, 40)};
  entity::NucleiSet n;
  n.centroids = {{5, 5}, {8, 6}, {30, 30}};
  FeatureSpec spec;
  spec.mode = FeatureMode::none;
  const auto g = assemble_hact(img, n, seg, spec, 5, 10);
  EXPECT_EQ(g.cell_graph.feature_dim(), 2u);
  EXPECT_EQ(g.tissue_graph.feature_dim(), 2u);
  EXPECT_EQ(g.cell_graph.edges, (EdgeList{{0, 1}}));
  EXPECT_EQ(g.tissue_graph.edges, (EdgeList{{0, 1}, {0, 2}, {1, 3}, {2, 3}}));
  EXPECT_EQ(g.cell_region, (std::vector<std::uint32_t>{0, 0, 3}));
  EXPECT_DOUBLE_EQ(g.tissue_graph.features(3, 0), 29.5 / 40);
  const auto a = g.assignment_matrix();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < a.cols(); ++j) s += a(i, j);
    EXPECT_DOUBLE_EQ(s, 1.0);
  }
}

TEST(Assemble, HandcraftedAndRoundTrip) {
  Rng rng(4);
  RgbImage img(48, 48);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.index(256));
  TissueSegmentation seg{quadrants(48, 48), quadrants(48, 48)};
  entity::NucleiSet n;
  n.centroids = random_points(rng, 12, 47);
  const auto g = assemble_hact(img, n, seg, FeatureSpec{}, 5, 20);
  EXPECT_EQ(g.cell_graph.feature_dim(), kHandcraftedDim + 2);
  EXPECT_EQ(g.tissue_graph.feature_dim(), kHandcraftedDim + 2);
  EXPECT_EQ(hact_from_json(to_json(g)), g);
}

TEST(Assemble, NoNucleiSingleRegion) {
  RgbImage img(16, 16, 180);
  entity::SuperpixelMap one;
  one.labels = LabelImage(16, 16);
  one.region_count = 1;
  const auto g = assemble_hact(img, entity::NucleiSet{}, TissueSegmentation{one, one}, FeatureSpec{});
  EXPECT_EQ(g.cell_graph.node_count, 0u);
  EXPECT_EQ(g.tissue_graph.node_count, 1u);
  EXPECT_TRUE(g.tissue_graph.edges.empty());
}

TEST(Assemble, ExternalFeatureRowMismatch) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto cell = (dir / "hact_cell_feats.csv").string(), tissue = (dir / "hact_tissue_feats.csv").string();
  std::ofstream(cell) << "1,2\n3,4\n";
  std::ofstream(tissue) << "1\n2\n3\n4\n";
  RgbImage img(20, 20);
  TissueSegmentation seg{quadrants(20, 20), quadrants(20, 20)};
  entity::NucleiSet n;
  n.centroids = {{1, 1}, {2, 2}};
  FeatureSpec spec;
  spec.mode = FeatureMode::external;
  spec.external_cell_path = cell;
  spec.external_tissue_path = tissue;
  const auto g = assemble_hact(img, n, seg, spec);
  EXPECT_EQ(g.cell_graph.feature_dim(), 4u);
  EXPECT_EQ(g.tissue_graph.feature_dim(), 3u);
  n.centroids.push_back({3, 3});
  try {
    assemble_hact(img, n, seg, spec);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::shape_mismatch);
  }
}

TEST(GraphJson, RejectsInconsistentGraph) {
  Rng rng(1);
  RgbImage img(20, 20);
  TissueSegmentation seg{quadrants(20, 20), quadrants(20, 20)};
  entity::NucleiSet n;
  n.centroids = {{1, 1}, {2, 2}};
  FeatureSpec spec;
  spec.mode = FeatureMode::none;
  auto j = to_json(assemble_hact(img, n, seg, spec));
  j["assignment"] = std::vector<int>{1, 1, 0, 0, 0, 0, 0, 0};
  EXPECT_THROW(hact_from_json(j), Error);
}
