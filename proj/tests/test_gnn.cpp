#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hact/gnn/hactnet.hpp"
#include "hact/nn/gradcheck.hpp"
#include "support/graphs.hpp"

using namespace hact;
using namespace hact::gnn;
using hact::testing::random_hact;
using hact::testing::RandomGraphSpec;

namespace {

graph::EntityGraph graph_with_degrees(std::size_t n, const graph::EdgeList& edges) {
  graph::EntityGraph g;
  g.node_count = n;
  g.edges = edges;
  g.centroids.assign(n, {0, 0});
  g.features = Tensor::matrix(n, 1);
  return g;
}

HactNetConfig small_config(ModelKind kind, LayerType type, JkMode jk, std::size_t cell_dim = 4,
                           std::size_t tissue_dim = 3) {
  HactNetConfig c;
  c.kind = kind;
  c.layer_type = type;
  c.jk = jk;
  c.cell_feature_dim = cell_dim;
  c.tissue_feature_dim = tissue_dim;
  c.num_classes = 3;
  c.cell_layers = 2;
  c.tissue_layers = 2;
  c.hidden_dim = 8;
  c.embedding_dim = 6;
  c.classifier_hidden = 5;
  return c;
}

double project(const Tensor& y, const Tensor& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += y[i] * w[i];
  return s;
}

}  // namespace

// ---- delta -----------------------------------------------------------------

TEST(Delta, ConstantDegreeOne) {
  const auto g = graph_with_degrees(4, {{0, 1}, {2, 3}});
  const graph::EntityGraph* gs[] = {&g};
  EXPECT_NEAR(compute_delta(gs).delta, std::log(2.0), 1e-15);
}

TEST(Delta, TwoDegreesEqually) {
  // a single edge (two degree-1 nodes) and K4 (four degree-3 nodes)
  const auto a = graph_with_degrees(2, {{0, 1}});
  const auto b = graph_with_degrees(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
  const graph::EntityGraph* gs[] = {&a, &b};
  const graph::EntityGraph* eq[] = {&a, &a, &b};
  EXPECT_NEAR(compute_delta(eq).delta, (std::log(2.0) + std::log(4.0)) / 2.0, 1e-15);
  EXPECT_EQ(compute_delta(gs).sample_count, 6u);
}

TEST(Delta, ConcatenatedCorporaGiveWeightedMean) {
  Rng rng(1);
  std::vector<graph::EntityGraph> c1, c2;
  for (int i = 0; i < 4; ++i) c1.push_back(graph_with_degrees(9, hact::testing::random_edges(9, 0.3, 0, rng)));
  for (int i = 0; i < 3; ++i) c2.push_back(graph_with_degrees(5, hact::testing::random_edges(5, 0.6, 0, rng)));
  std::vector<const graph::EntityGraph*> p1, p2, all;
  for (auto& g : c1) p1.push_back(&g), all.push_back(&g);
  for (auto& g : c2) p2.push_back(&g), all.push_back(&g);
  const auto d1 = compute_delta(p1), d2 = compute_delta(p2), d = compute_delta(all);
  const double expect = (d1.delta * static_cast<double>(d1.sample_count) + d2.delta * static_cast<double>(d2.sample_count)) /
                        static_cast<double>(d1.sample_count + d2.sample_count);
  EXPECT_NEAR(d.delta, expect, 1e-14);
}

TEST(Delta, AllIsolatedIsDegenerate) {
  const auto g = graph_with_degrees(3, {});
  const graph::EntityGraph* gs[] = {&g};
  try {
    compute_delta(gs);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::degenerate_delta);
  }
}

// ---- PNA aggregation -------------------------------------------------------

TEST(PnaAggregate, StatisticsOfOneTwoThree) {
  // node 0 has neighbours 1, 2, 3 with features 1, 2, 3
  const Tensor h({4, 1}, std::vector<double>{0, 1, 2, 3});
  const double delta = std::log(2.0);
  const Tensor out = pna_aggregate(h, graph::EdgeList{{0, 1}, {0, 2}, {0, 3}}, delta);
  ASSERT_EQ(out.cols(), 12u);
  // identity-scaler column of each aggregator
  EXPECT_NEAR(out(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(out(0, 3), std::sqrt(2.0 / 3.0), 1e-8);
  EXPECT_EQ(out(0, 6), 3.0);
  EXPECT_EQ(out(0, 9), 1.0);
  // degree 3, delta = ln 2: amplify = ln 4 / ln 2 = 2, attenuate = 0.5
  EXPECT_NEAR(out(0, 1), 4.0, 1e-14);
  EXPECT_NEAR(out(0, 2), 1.0, 1e-14);
  EXPECT_NEAR(out(0, 7), 6.0, 1e-14);
  EXPECT_NEAR(out(0, 11), 0.5, 1e-14);
}

TEST(PnaAggregate, ScalerClosedForm) {
  const auto s = pna_scalers(3, std::log(2.0));
  EXPECT_NEAR(s[1], 2.0, 1e-15);
  EXPECT_NEAR(s[2], 0.5, 1e-15);
}

TEST(PnaAggregate, IdenticalNeighboursHaveZeroStd) {
  const Tensor h({4, 2}, std::vector<double>{0, 0, 0.7, -3, 0.7, -3, 0.7, -3});
  const Tensor out = pna_aggregate(h, graph::EdgeList{{0, 1}, {0, 2}, {0, 3}}, 1.3);
  for (std::size_t c = 2 * 3; c < 2 * 6; ++c) EXPECT_EQ(out(0, c), 0.0);
}

TEST(PnaAggregate, IsolatedNodeGetsZeroBlocks) {
  Rng rng(2);
  const Tensor h = hact::testing::random_features(3, 2, rng);
  const Tensor out = pna_aggregate(h, graph::EdgeList{{0, 1}}, 0.8);
  for (double v : out.row(2)) EXPECT_EQ(v, 0.0);
}

TEST(PnaAggregate, NonPositiveDeltaIsAnError) {
  EXPECT_THROW(pna_aggregate(Tensor::matrix(2, 1), graph::EdgeList{{0, 1}}, 0.0), Error);
}

TEST(PnaAggregate, BackwardMatchesFiniteDifferences) {
  Rng rng(3);
  const auto edges = hact::testing::random_edges(8, 0.4, 1, rng);
  nn::Parameter h(hact::testing::random_features(8, 3, rng));
  const auto lv = level_from_edges(8, edges, Tensor::matrix(8, 0));
  const Tensor w = hact::testing::random_features(8, 36, rng);
  nn::ParamList params{{"h", &h}};
  auto loss = [&] { return project(pna_aggregate(h.value, lv, 0.9), w); };
  auto grads = [&] {
    PnaCache c;
    pna_aggregate(h.value, lv, 0.9, &c);
    h.grad = Tensor(h.value.shape());
    pna_aggregate_backward(h.value, lv, 0.9, c, w, h.grad);
  };
  EXPECT_LT(nn::gradcheck(params, loss, grads).max_rel_error, 1e-4);
}

// ---- layers ----------------------------------------------------------------

TEST(GinLayer, IdentityMlpArithmetic) {
  Rng rng(4);
  GnnLayer layer(LayerType::gin, 1, 1, 1, true, rng);
  layer.mlp() = nn::Mlp::identity(1);
  const Tensor h({4, 1}, std::vector<double>{1, 2, 3, 5});
  const auto lv = level_from_edges(4, {{0, 1}, {0, 2}}, h);
  const Tensor y = layer.pre_norm(h, lv, 1.0);
  EXPECT_EQ(y(0, 0), 6.0);
  EXPECT_EQ(y(3, 0), 5.0);  // isolated: unchanged
}

TEST(PnaLayer, EmptyEdgeSetDependsOnlyOnSelf) {
  Rng rng(5);
  GnnLayer layer(LayerType::pna, 3, 8, 2, true, rng);
  Tensor h = hact::testing::random_features(5, 3, rng);
  const auto lv = level_from_edges(5, {}, h);
  const Tensor a = layer.forward(h, lv, 1.0, nn::Mode::eval);
  for (std::size_t c = 0; c < 3; ++c) h(4, c) += 1.0;
  const Tensor b = layer.forward(h, lv, 1.0, nn::Mode::eval);
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 8; ++c) EXPECT_EQ(a(r, c), b(r, c));
}

TEST(Layers, PermutingNodesPermutesRows) {
  for (const auto type : {LayerType::gin, LayerType::pna}) {
    Rng rng(6);
    GnnLayer layer(type, 3, 8, 2, true, rng);
    auto g = random_hact(rng, {.cells = 10, .cell_dim = 3, .isolated_cells = 2}).cell_graph;
    const auto perm = hact::testing::random_permutation(10, rng);
    const auto pg = hact::testing::permute_graph(g, perm);
    const graph::EntityGraph* a[] = {&g};
    const graph::EntityGraph* b[] = {&pg};
    const auto la = make_level(a), lb = make_level(b);
    const Tensor ya = layer.forward(la.features, la, 1.1, nn::Mode::train);
    const Tensor yb = layer.forward(lb.features, lb, 1.1, nn::Mode::train);
    for (std::size_t i = 0; i < 10; ++i)
      for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(ya(i, c), yb(perm[i], c), 1e-12);
  }
}

TEST(Layers, GradientsMatchFiniteDifferences) {
  for (const auto type : {LayerType::gin, LayerType::pna})
    for (const auto mode : {nn::Mode::train, nn::Mode::eval}) {
      Rng rng(7);
      GnnLayer layer(type, 3, 6, 2, true, rng);
      const auto g = random_hact(rng, {.cells = 9, .cell_dim = 3, .isolated_cells = 1}).cell_graph;
      const graph::EntityGraph* gs[] = {&g};
      const auto lv = make_level(gs);
      nn::Parameter h(lv.features);
      const Tensor w = hact::testing::random_features(9, 6, rng);
      nn::ParamList params{{"h", &h}};
      layer.collect("layer", params);
      auto loss = [&] { return project(layer.forward(h.value, lv, 0.9, mode), w); };
      auto grads = [&] {
        nn::zero_grads(params);
        GnnLayer::Cache c;
        layer.forward(h.value, lv, 0.9, mode, &c);
        h.grad = layer.backward(c, lv, 0.9, w);
      };
      const auto r = nn::gradcheck(params, loss, grads);
      EXPECT_LT(r.max_rel_error, 1e-4) << to_string(type) << " " << r.worst_param;
    }
}

TEST(GinLayer, IsomorphicGraphsGiveIdenticalEmbeddingMultisets) {
  Rng rng(8);
  GnnLayer layer(LayerType::gin, 2, 8, 2, true, rng);
  const auto g = random_hact(rng, {.cells = 8, .cell_dim = 2}).cell_graph;
  const auto pg = hact::testing::permute_graph(g, hact::testing::random_permutation(8, rng));
  auto embed = [&](const graph::EntityGraph& x) {
    const graph::EntityGraph* gs[] = {&x};
    const auto lv = make_level(gs);
    const Tensor y = layer.forward(lv.features, lv, 1.0, nn::Mode::eval);
    std::vector<std::vector<double>> rows;
    for (std::size_t r = 0; r < y.rows(); ++r) rows.emplace_back(y.row(r).begin(), y.row(r).end());
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const auto a = embed(g), b = embed(pg);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t c = 0; c < a[i].size(); ++c) EXPECT_NEAR(a[i][c], b[i][c], 1e-12);
}

TEST(GinLayer, DistinguishesWlSeparableGraphs) {
  // path on 4 nodes vs star on 4 nodes, constant features: 1-WL separates them
  const auto path = graph_with_degrees(4, {{0, 1}, {1, 2}, {2, 3}});
  const auto star = graph_with_degrees(4, {{0, 1}, {0, 2}, {0, 3}});
  int differ = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    GnnLayer l1(LayerType::gin, 1, 16, 2, false, rng), l2(LayerType::gin, 16, 16, 2, false, rng);
    auto embed = [&](const graph::EntityGraph& g) {
      const graph::EntityGraph* gs[] = {&g};
      auto lv = make_level(gs);
      lv.features.fill(1.0);
      const Tensor h1 = l1.forward(lv.features, lv, 1.0, nn::Mode::eval);
      return readout_sum(l2.forward(h1, lv, 1.0, nn::Mode::eval));
    };
    if (max_abs_diff(embed(path), embed(star)) > 1e-9) ++differ;
  }
  EXPECT_GE(differ, 19);
}

// ---- jumping knowledge, hand-off, readout -----------------------------------

TEST(JumpingKnowledge, Modes) {
  Rng rng(9);
  std::vector<Tensor> layers;
  for (int t = 0; t < 3; ++t) layers.push_back(hact::testing::random_features(5, 64, rng));
  EXPECT_EQ(JumpingKnowledge(JkMode::none, 3, 64, rng).forward(layers), layers[2]);
  const JumpingKnowledge concat(JkMode::concat, 3, 64, rng);
  EXPECT_EQ(concat.out_dim(), 192u);
  EXPECT_EQ(concat.forward(layers).cols(), 192u);
  const JumpingKnowledge lstm(JkMode::lstm, 3, 64, rng);
  EXPECT_EQ(lstm.forward(layers).cols(), 64u);
  layers[1] = hact::testing::random_features(4, 64, rng);
  EXPECT_THROW(concat.forward(layers), Error);
}

TEST(JumpingKnowledge, LstmOverOneLayerIsOneCell) {
  Rng rng(10);
  const JumpingKnowledge jk(JkMode::lstm, 1, 4, rng);
  Rng rng2(10);
  const nn::Lstm cell(4, 4, rng2);
  const std::vector<Tensor> one{hact::testing::random_features(3, 4, rng)};
  EXPECT_EQ(jk.forward(one), cell.forward(one));
}

TEST(TissueInit, EmptyRegionAndSingletons) {
  const Tensor h_tg({3, 2}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor cell_jk({2, 2}, std::vector<double>{10, 20, 30, 40});
  Tensor a = Tensor::matrix(2, 3);
  a(0, 0) = 1;
  a(1, 2) = 1;
  const Tensor t = tissue_init(h_tg, cell_jk, a);
  ASSERT_EQ(t.cols(), 4u);
  EXPECT_EQ(std::vector<double>(t.row(0).begin(), t.row(0).end()), (std::vector<double>{1, 2, 10, 20}));
  EXPECT_EQ(std::vector<double>(t.row(1).begin(), t.row(1).end()), (std::vector<double>{3, 4, 0, 0}));
  EXPECT_EQ(std::vector<double>(t.row(2).begin(), t.row(2).end()), (std::vector<double>{5, 6, 30, 40}));
  EXPECT_THROW(tissue_init(h_tg, cell_jk, Tensor::matrix(3, 3)), Error);
}

TEST(TissueInit, MassConservation) {
  Rng rng(11);
  const auto g = random_hact(rng, {.cells = 30, .regions = 6});
  const Tensor cell_jk = hact::testing::random_features(30, 5, rng);
  const Tensor t = tissue_init(g.tissue_graph.features, cell_jk, g.assignment_matrix());
  for (std::size_t c = 0; c < 5; ++c) {
    double in = 0, out = 0;
    for (std::size_t r = 0; r < 30; ++r) in += cell_jk(r, c);
    for (std::size_t r = 0; r < 6; ++r) out += t(r, 3 + c);
    EXPECT_NEAR(in, out, 1e-10);
  }
  const auto b = make_batch(g);
  EXPECT_LT(max_abs_diff(slice_cols(t, 3, 5), scatter_cells(cell_jk, b.cell_region, 6)), 1e-15);
}

TEST(Readout, Examples) {
  const Tensor one({1, 3}, std::vector<double>{1, -2, 3});
  EXPECT_EQ(readout_sum(one), Tensor({3}, std::vector<double>{1, -2, 3}));
  const Tensor two({2, 3}, std::vector<double>{1, -2, 3, 1, -2, 3});
  EXPECT_EQ(readout_sum(two), scaled(readout_sum(one), 2.0));
  EXPECT_THROW(readout_sum(Tensor::matrix(0, 3)), Error);
}

// ---- full model ------------------------------------------------------------

TEST(HactNet, OutputLengthIsClassCount) {
  Rng rng(12);
  const auto g = random_hact(rng);
  HactNet net(small_config(ModelKind::hact, LayerType::pna, JkMode::lstm), 1);
  EXPECT_EQ(hactnet_forward(net, g).size(), 3u);
}

TEST(HactNet, DefaultWidths) {
  HactNetConfig c;
  c.cell_feature_dim = 18;
  c.tissue_feature_dim = 18;
  c.num_classes = 7;
  HactNet net(c, 0);
  Rng rng(13);
  const auto g = random_hact(rng, {.cell_dim = 18, .tissue_dim = 18});
  HactNet::Tape tape;
  net.forward(make_batch(g), nn::Mode::eval, tape);
  EXPECT_EQ(tape.embedding.cols(), 128u);
  EXPECT_EQ(tape.tissue_in.cols(), 18u + 64u);
}

TEST(HactNet, FeatureDimensionMismatchIsAnError) {
  Rng rng(14);
  const auto g = random_hact(rng, {.cell_dim = 5});
  HactNet net(small_config(ModelKind::hact, LayerType::pna, JkMode::none), 1);
  EXPECT_THROW(hactnet_forward(net, g), Error);
}

TEST(HactNet, InvariantToNodeRelabelling) {
  for (const auto kind : {ModelKind::hact, ModelKind::cg_only, ModelKind::tg_only, ModelKind::concat})
    for (const auto type : {LayerType::gin, LayerType::pna}) {
      Rng rng(15);
      const auto g = random_hact(rng, {.cells = 14, .regions = 4, .isolated_cells = 2});
      const auto pg = hact::testing::permute_hact(g, hact::testing::random_permutation(14, rng),
                                                  hact::testing::random_permutation(4, rng));
      HactNet net(small_config(kind, type, JkMode::lstm), 3);
      EXPECT_LT(max_abs_diff(hactnet_forward(net, g), hactnet_forward(net, pg)), 1e-9);
    }
}

// A single graph in train mode is degenerate: BatchNorm output sums to n * beta
// per feature, so the readout ignores every earlier parameter. Single graphs are
// therefore checked in eval mode and batches of several graphs in train mode.
TEST(HactNet, GradientsMatchFiniteDifferences) {
  for (const auto kind : {ModelKind::hact, ModelKind::cg_only, ModelKind::tg_only, ModelKind::concat})
    for (const auto type : {LayerType::gin, LayerType::pna})
      for (const auto jk : {JkMode::none, JkMode::concat, JkMode::lstm})
        for (const auto mode : {nn::Mode::eval, nn::Mode::train}) {
          Rng rng(16);
          std::vector<graph::HactGraph> graphs;
          const std::size_t count = mode == nn::Mode::eval ? 1 : 3;
          for (std::size_t i = 0; i < count; ++i)
            graphs.push_back(random_hact(rng, {.cells = 12, .regions = 3, .isolated_cells = 1}));
          std::vector<const graph::HactGraph*> ptrs;
          for (const auto& g : graphs) ptrs.push_back(&g);
          HactNet net(small_config(kind, type, jk), 5);
          const auto b = make_batch(ptrs);
          const std::vector<std::size_t> labels{1, 0, 2};
          const std::span<const std::size_t> lab(labels.data(), count);
          const auto params = net.parameters();
          auto loss = [&] { return nn::softmax_cross_entropy(net.forward(b, mode), lab).loss; };
          auto grads = [&] {
            nn::zero_grads(params);
            HactNet::Tape tape;
            const auto ce = nn::softmax_cross_entropy(net.forward(b, mode, tape), lab);
            net.backward(b, tape, ce.grad);
          };
          const auto r = nn::gradcheck(params, loss, grads, {.skip_nonsmooth = true});
          EXPECT_LT(r.skipped * 20, r.checked);
          EXPECT_LT(r.max_rel_error, 1e-4) << to_string(kind) << "/" << to_string(type) << "/" << to_string(jk) << "/"
                                           << (mode == nn::Mode::eval ? "eval " : "train ") << r.worst_param << "["
                                           << r.worst_index << "] " << r.analytic << " vs " << r.numeric;
        }
}

TEST(HactNet, IsolatedNodesStayFinite) {
  Rng rng(17);
  auto g = random_hact(rng, {.cells = 6, .regions = 3, .isolated_cells = 6});
  g.tissue_graph.edges.clear();
  HactNet net(small_config(ModelKind::hact, LayerType::pna, JkMode::lstm), 2);
  const auto b = make_batch(g);
  HactNet::Tape tape;
  const std::vector<std::size_t> label{0};
  const auto ce = nn::softmax_cross_entropy(net.forward(b, nn::Mode::train, tape), label);
  EXPECT_TRUE(std::isfinite(ce.loss));
  net.zero_grad();
  net.backward(b, tape, ce.grad);
  for (const auto& [name, p] : net.parameters()) EXPECT_TRUE(p->grad.all_finite()) << name;
}

TEST(HactNet, HierarchicalHandOffIsLive) {
  Rng rng(18);
  int changed = 0;
  for (int i = 0; i < 5; ++i) {
    const auto g = random_hact(rng);
    HactNet net(small_config(ModelKind::hact, LayerType::pna, JkMode::lstm), static_cast<std::uint64_t>(i));
    auto b = make_batch(g);
    const Tensor with = net.forward(b, nn::Mode::eval);
    std::fill(b.cell_region.begin(), b.cell_region.end(), kNoRegion);
    const Tensor without = net.forward(b, nn::Mode::eval);
    if (max_abs_diff(with, without) > 1e-9) ++changed;
  }
  EXPECT_EQ(changed, 5);
}

TEST(TrainStep, OverfitsOneGraph) {
  Rng rng(19);
  const auto g = random_hact(rng);
  HactNetConfig c = small_config(ModelKind::hact, LayerType::pna, JkMode::lstm);
  c.hidden_dim = 64;
  c.embedding_dim = 128;
  c.classifier_hidden = 128;
  HactNet net(c, 7);
  nn::AdamState opt;
  const graph::HactGraph* batch[] = {&g};
  const std::vector<std::size_t> label{2};
  double loss = 1.0;
  int steps = 0;
  while (steps < 500 && loss >= 1e-3) {
    loss = train_step(net, opt, batch, label);
    ++steps;
  }
  EXPECT_LT(loss, 1e-3) << "after " << steps << " steps";
}

TEST(TrainStep, ZeroLearningRateKeepsParameters) {
  Rng rng(20);
  const auto g1 = random_hact(rng), g2 = random_hact(rng);
  HactNet net(small_config(ModelKind::hact, LayerType::gin, JkMode::concat), 7);
  std::vector<Tensor> before;
  for (const auto& [n, p] : net.parameters()) before.push_back(p->value);
  nn::AdamState opt;
  opt.lr = 0.0;
  const graph::HactGraph* batch[] = {&g1, &g2};
  const std::vector<std::size_t> labels{0, 1};
  train_step(net, opt, batch, labels);
  const auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) EXPECT_EQ(params[i].second->value, before[i]) << params[i].first;
}

TEST(TrainStep, FirstLossIsForwardPlusCrossEntropy) {
  Rng rng(21);
  const auto g1 = random_hact(rng), g2 = random_hact(rng);
  const graph::HactGraph* batch[] = {&g1, &g2};
  const std::vector<std::size_t> labels{0, 2};
  HactNet a(small_config(ModelKind::hact, LayerType::pna, JkMode::lstm), 9);
  HactNet b(small_config(ModelKind::hact, LayerType::pna, JkMode::lstm), 9);
  nn::AdamState opt;
  const double step_loss = train_step(a, opt, batch, labels);
  const double manual = nn::softmax_cross_entropy(b.forward(make_batch(batch), nn::Mode::train), labels).loss;
  EXPECT_EQ(step_loss, manual);
}

TEST(TrainStep, LabelOutOfRangeIsAnError) {
  Rng rng(22);
  const auto g = random_hact(rng);
  HactNet net(small_config(ModelKind::hact, LayerType::pna, JkMode::lstm), 1);
  nn::AdamState opt;
  const graph::HactGraph* batch[] = {&g};
  const std::vector<std::size_t> label{3};
  EXPECT_THROW(train_step(net, opt, batch, label), Error);
}
