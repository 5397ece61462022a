// Copyright 2026 The GCL-LRR Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <set>

#include <catch_amalgamated.hpp>

#include "gcllrr/encoder.hpp"
#include "gcllrr/sbm.hpp"
#include "test_util.hpp"

using namespace gcllrr;

namespace {

GraphBundle cycle_bundle(Index n, Index d) {
  GraphBundle b;
  b.num_nodes = n;
  b.num_features = d;
  b.num_classes = 2;
  for (Index i = 0; i < n; ++i) b.edges.emplace_back(std::min(i, (i + 1) % n),
                                                     std::max(i, (i + 1) % n));
  std::sort(b.edges.begin(), b.edges.end());
  b.edges.erase(std::unique(b.edges.begin(), b.edges.end()), b.edges.end());
  b.features = testutil::random_matrix(n, d, 101, 0.1, 1.0);
  std::vector<Index> labels(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i % 2;
  b.clean_labels = one_hot_labels(labels, 2);
  validate_bundle(b);
  return b;
}

std::set<Edge> edges_of(const Matrix& adjacency) {
  std::set<Edge> out;
  for (Index i = 0; i < adjacency.rows(); ++i)
    for (Index j = i + 1; j < adjacency.cols(); ++j)
      if (adjacency(i, j) != 0.0) out.insert({i, j});
  return out;
}

}  // namespace

TEST_CASE("gcn forward with zero weights is zero") {
  const GraphBundle b = cycle_bundle(5, 3);
  EncoderParams p{Matrix::Zero(3, 4), Matrix::Zero(4, 2)};
  const Matrix adjacency = normalize_adjacency(b).matrix;
  REQUIRE(gcn_forward(p, b.features, adjacency) == Matrix::Zero(5, 2));
}

TEST_CASE("gcn forward on a single self-looped node is the scalar chain") {
  GraphBundle b;
  b.num_nodes = 1;
  b.num_features = 1;
  b.num_classes = 1;
  b.features = Matrix::Ones(1, 1);
  b.clean_labels = Matrix::Ones(1, 1);
  const Matrix adjacency = normalize_adjacency(b).matrix;
  REQUIRE(adjacency(0, 0) == 1.0);
  EncoderParams p{Matrix::Ones(1, 1), Matrix::Ones(1, 1)};
  REQUIRE(gcn_forward(p, b.features, adjacency)(0, 0) == 1.0);
}

TEST_CASE("gcn forward matches a straight-line re-evaluation") {
  const GraphBundle b = cycle_bundle(6, 4);
  const Matrix a = normalize_adjacency(b).matrix;
  EncoderParams p{testutil::random_matrix(4, 5, 7), testutil::random_matrix(5, 3, 8)};
  const Matrix got = gcn_forward(p, b.features, a);
  const Matrix expected =
      (a * (a * b.features * p.w0).cwiseMax(0.0) * p.w1).cwiseMax(0.0);
  REQUIRE((got - expected).cwiseAbs().maxCoeff() <= 1e-12);
  REQUIRE(got.minCoeff() >= 0.0);
}

TEST_CASE("gcn forward validates shapes") {
  const GraphBundle b = cycle_bundle(5, 3);
  const Matrix a = normalize_adjacency(b).matrix;
  EncoderParams bad{Matrix::Zero(2, 4), Matrix::Zero(4, 2)};
  REQUIRE_THROWS_AS(gcn_forward(bad, b.features, a), contract_error);
}

TEST_CASE("identity augmentation changes nothing") {
  const GraphBundle b = cycle_bundle(8, 5);
  AugmentationSpec spec;
  spec.edge_perturb_ratio = 0.0;
  spec.feature_mask_ratio = 0.0;
  spec.node_drop_ratio = 0.0;
  spec.seed = 4;
  const AugmentedView v = augment_view(b, spec);
  REQUIRE(v.features == b.features);
  REQUIRE(v.adjacency == normalize_adjacency(b).matrix);
}

TEST_CASE("feature masking zeroes the requested number of columns") {
  const GraphBundle b = cycle_bundle(8, 10);
  AugmentationSpec spec;
  spec.edge_perturb_ratio = 0.0;
  spec.feature_mask_ratio = 0.5;
  spec.seed = 5;
  const AugmentedView v = augment_view(b, spec);
  Index zero_cols = 0;
  for (Index j = 0; j < 10; ++j) {
    if (v.features.col(j).cwiseAbs().maxCoeff() == 0.0) ++zero_cols;
  }
  REQUIRE(zero_cols == 5);  // features are strictly positive, so zeros are masks
}

TEST_CASE("edge perturbation swaps the requested number of edges") {
  const GraphBundle b = cycle_bundle(20, 3);
  REQUIRE(b.edges.size() == 20);
  AugmentationSpec spec;
  spec.edge_perturb_ratio = 0.2;
  spec.feature_mask_ratio = 0.0;
  spec.seed = 6;
  const AugmentedView v = augment_view(b, spec);
  const std::set<Edge> original(b.edges.begin(), b.edges.end());
  const std::set<Edge> now = edges_of(v.adjacency);
  Index removed = 0, added = 0;
  for (const Edge& e : original)
    if (!now.count(e)) ++removed;
  for (const Edge& e : now)
    if (!original.count(e)) ++added;
  REQUIRE(removed == 4);
  REQUIRE(added == 4);
}

TEST_CASE("node dropping zeroes features and detaches edges in place") {
  const GraphBundle b = cycle_bundle(6, 4);
  AugmentationSpec spec;
  spec.edge_perturb_ratio = 0.0;
  spec.feature_mask_ratio = 0.0;
  spec.node_drop_ratio = 0.3;  // ceil(1.8) = 2 nodes
  spec.seed = 7;
  const AugmentedView v = augment_view(b, spec);
  Index dropped = 0;
  for (Index i = 0; i < 6; ++i) {
    if (v.features.row(i).cwiseAbs().maxCoeff() == 0.0) {
      ++dropped;
      REQUIRE(v.adjacency(i, i) == 1.0);
      REQUIRE(v.adjacency.row(i).sum() == 1.0);
    }
  }
  REQUIRE(dropped == 2);
  REQUIRE(v.features.rows() == 6);  // rows stay index aligned
}

TEST_CASE("augmentation is deterministic given the seed") {
  const GraphBundle b = cycle_bundle(12, 6);
  AugmentationSpec spec;
  spec.seed = 9;
  const AugmentedView v1 = augment_view(b, spec);
  const AugmentedView v2 = augment_view(b, spec);
  REQUIRE(v1.features == v2.features);
  REQUIRE(v1.adjacency == v2.adjacency);
}

TEST_CASE("node loss with uniform similarities is log N") {
  const Matrix h = Matrix::Ones(4, 3);
  const NodeContrastiveLoss l = contrastive_loss_node(h, h, 0.5);
  REQUIRE_THAT(l.value, Catch::Matchers::WithinAbs(std::log(4.0), 1e-12));
}

TEST_CASE("node loss on two orthonormal rows hits the closed form") {
  const Matrix h = Matrix::Identity(2, 2);
  const NodeContrastiveLoss l = contrastive_loss_node(h, h, 1.0);
  REQUIRE_THAT(l.value, Catch::Matchers::WithinAbs(std::log1p(std::exp(-1.0)), 1e-12));
}

TEST_CASE("node loss gradients match finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix h1 = testutil::random_matrix(5, 3, seed, 0.2, 1.2);
    const Matrix h2 = testutil::random_matrix(5, 3, seed + 50, 0.2, 1.2);
    const NodeContrastiveLoss l = contrastive_loss_node(h1, h2, 0.5);
    const Matrix fd1 = testutil::fd_gradient(
        [&](const Matrix& x) { return contrastive_loss_node(x, h2, 0.5).value; }, h1);
    const Matrix fd2 = testutil::fd_gradient(
        [&](const Matrix& x) { return contrastive_loss_node(h1, x, 0.5).value; }, h2);
    REQUIRE(testutil::relative_error(fd1, l.grad_view1) <= 1e-4);
    REQUIRE(testutil::relative_error(fd2, l.grad_view2) <= 1e-4);
    REQUIRE(l.value >= 0.0);
  }
}

TEST_CASE("node loss rejects zero rows") {
  Matrix h1 = testutil::random_matrix(3, 2, 1);
  Matrix h2 = h1;
  h1.row(1).setZero();
  REQUIRE_THROWS_AS(contrastive_loss_node(h1, h2, 0.5), degenerate_input_error);
}

TEST_CASE("prototype loss over a single cluster is zero") {
  const Matrix h = testutil::random_matrix(6, 3, 2);
  const PrototypeSet p = cluster_prototypes(h, 1, 1);
  const ProtoContrastiveLoss l = contrastive_loss_proto(h, p, 0.5);
  REQUIRE_THAT(l.value, Catch::Matchers::WithinAbs(0.0, 1e-12));
  REQUIRE(l.grad.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("prototype loss with equal logits is log K") {
  PrototypeSet p;
  p.prototypes = testutil::random_matrix(4, 3, 3);
  p.assignments = {0, 1, 2, 3, 0};
  p.cluster_sizes = {2, 1, 1, 1};
  const Matrix h = Matrix::Zero(5, 3);
  const ProtoContrastiveLoss l = contrastive_loss_proto(h, p, 0.7);
  REQUIRE_THAT(l.value, Catch::Matchers::WithinAbs(std::log(4.0), 1e-12));
}

TEST_CASE("prototype loss gradient matches finite differences") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Matrix h = testutil::random_matrix(7, 4, seed + 10);
    const PrototypeSet p = cluster_prototypes(h, 3, seed);
    const ProtoContrastiveLoss l = contrastive_loss_proto(h, p, 0.5);
    const Matrix fd = testutil::fd_gradient(
        [&](const Matrix& x) { return contrastive_loss_proto(x, p, 0.5).value; }, h);
    REQUIRE(testutil::relative_error(fd, l.grad) <= 1e-4);
    REQUIRE(l.value >= 0.0);
  }
}

TEST_CASE("prototype loss rejects empty clusters") {
  PrototypeSet p;
  p.prototypes = testutil::random_matrix(2, 3, 4);
  p.assignments = {0, 0, 0};
  p.cluster_sizes = {3, 0};
  const Matrix h = testutil::random_matrix(3, 3, 5);
  REQUIRE_THROWS_AS(contrastive_loss_proto(h, p, 0.5), contract_error);
}

TEST_CASE("composite loss with zero TNN weight is node plus proto") {
  const GraphBundle b = cycle_bundle(8, 5);
  TrainConfig config;
  config.hidden_width = 12;
  config.embed_width = 12;
  config.tnn_weight = 0.0;
  config.rank_ratio = 0.4;
  const Matrix a = normalize_adjacency(b).matrix;
  const EncoderParams p = init_encoder_params(b.num_features, config);
  const LossBreakdown lb = gcl_lrr_loss(b, a, p, config, 17);
  REQUIRE(lb.total == lb.node + lb.proto);
}

TEST_CASE("composite TNN component vanishes when the rank bound is loose") {
  // All-positive weights and features keep both ReLUs in the linear regime,
  // so rank(H) <= rank(W1) = 1 <= r0.
  const GraphBundle b = cycle_bundle(8, 5);
  TrainConfig config;
  config.hidden_width = 3;
  config.embed_width = 4;
  config.rank_ratio = 0.6;  // r0 = ceil(0.6 * 4) = 3
  config.edge_perturb_ratio = 0.0;
  config.feature_mask_ratio = 0.0;
  EncoderParams p;
  p.w0 = Matrix::Constant(5, 3, 0.5);
  p.w1 = Matrix::Ones(3, 4);
  const Matrix a = normalize_adjacency(b).matrix;
  const LossBreakdown lb = gcl_lrr_loss(b, a, p, config, 23);
  REQUIRE(lb.tnn <= 1e-8);
}

TEST_CASE("composite parameter gradient matches finite differences") {
  const GraphBundle b = cycle_bundle(8, 4);
  TrainConfig config;
  config.hidden_width = 4;
  config.embed_width = 3;
  config.rank_ratio = 0.4;  // r0 = 2 < 3
  config.tnn_weight = 0.2;
  const Matrix a = normalize_adjacency(b).matrix;

  int tested = 0;
  for (std::uint64_t seed = 1; seed <= 60 && tested < 3; ++seed) {
    TrainConfig c = config;
    c.seed = seed;
    const EncoderParams p = init_encoder_params(b.num_features, c);
    const std::uint64_t epoch_seed = derive_seed(seed, 0x51);

    // Differentiability guards: rebuild the epoch's views and skip instances
    // with near-kink preactivations, near-zero rows, or a thin eigengap.
    AugmentationSpec aug;
    aug.edge_perturb_ratio = c.edge_perturb_ratio;
    aug.feature_mask_ratio = c.feature_mask_ratio;
    aug.node_drop_ratio = c.node_drop_ratio;
    aug.seed = derive_seed(epoch_seed, aug_salt::kView1);
    const AugmentedView v1 = augment_view(b, aug);
    aug.seed = derive_seed(epoch_seed, aug_salt::kView2);
    const AugmentedView v2 = augment_view(b, aug);
    bool ok = true;
    for (const auto& [x, adj] :
         {std::pair{b.features, a}, {v1.features, v1.adjacency}, {v2.features, v2.adjacency}}) {
      const GcnActivations acts = gcn_forward_cached(p, x, adj);
      if (acts.z1.cwiseAbs().minCoeff() < 1e-3 || acts.z2.cwiseAbs().minCoeff() < 1e-3) ok = false;
      if (acts.embeddings.rowwise().norm().minCoeff() < 5e-2) ok = false;
    }
    const GcnActivations clean = gcn_forward_cached(p, b.features, a);
    const Vector spectrum = gram_spectrum(clean.embeddings);
    const Index r0 = c.target_rank(b.num_nodes);
    if (spectrum(r0 - 1) - spectrum(r0) < 1e-3 * (1.0 + spectrum(0))) ok = false;
    if (!ok) continue;

    const PrototypeSet protos = cluster_prototypes(
        clean.embeddings, c.clusters_for(b.num_classes), derive_seed(epoch_seed, aug_salt::kProto));

    const LossBreakdown lb = gcl_lrr_loss(b, a, p, c, epoch_seed, &protos);
    REQUIRE_FALSE(lb.tnn_degenerate);

    const auto loss_at = [&](const EncoderParams& q) {
      return gcl_lrr_loss(b, a, q, c, epoch_seed, &protos).total;
    };
    const Matrix fd_w0 = testutil::fd_gradient(
        [&](const Matrix& w) {
          EncoderParams q = p;
          q.w0 = w;
          return loss_at(q);
        },
        p.w0);
    const Matrix fd_w1 = testutil::fd_gradient(
        [&](const Matrix& w) {
          EncoderParams q = p;
          q.w1 = w;
          return loss_at(q);
        },
        p.w1);
    REQUIRE(testutil::relative_error(fd_w0, lb.grad_w0) <= 1e-4);
    REQUIRE(testutil::relative_error(fd_w1, lb.grad_w1) <= 1e-4);
    ++tested;
  }
  REQUIRE(tested == 3);
}

TEST_CASE("zero-epoch training returns the initialization") {
  const GraphBundle b = cycle_bundle(10, 4);
  TrainConfig config;
  config.hidden_width = 4;
  config.embed_width = 3;
  config.rank_ratio = 0.4;
  config.epochs = 0;
  config.seed = 5;
  const TrainResult r = train_encoder(b, config);
  const EncoderParams init = init_encoder_params(b.num_features, config);
  REQUIRE(r.params.w0 == init.w0);
  REQUIRE(r.params.w1 == init.w1);
  REQUIRE(r.trace.empty());
}

TEST_CASE("training reduces the loss on a small SBM") {
  const GraphBundle b = generate_sbm(3, 20, 0.3, 0.02, 8, 1.5, 1);
  TrainConfig config;
  config.hidden_width = 16;
  config.embed_width = 8;
  config.rank_ratio = 0.4;
  config.epochs = 50;
  config.seed = 1;
  const TrainResult r = train_encoder(b, config);
  REQUIRE(r.trace.size() == 50);
  REQUIRE(r.trace.back().total < r.trace.front().total);
  for (const EpochStats& e : r.trace) {
    REQUIRE(e.node >= 0.0);
    REQUIRE(e.proto >= 0.0);
    REQUIRE(e.tnn >= -1e-12);
  }
}

TEST_CASE("training is bit deterministic given the seed") {
  const GraphBundle b = generate_sbm(2, 10, 0.4, 0.05, 6, 1.0, 2);
  TrainConfig config;
  config.hidden_width = 12;
  config.embed_width = 12;
  config.rank_ratio = 0.4;
  config.epochs = 12;
  config.seed = 33;
  const TrainResult r1 = train_encoder(b, config);
  const TrainResult r2 = train_encoder(b, config);
  REQUIRE(r1.params.w0 == r2.params.w0);
  REQUIRE(r1.params.w1 == r2.params.w1);
}

TEST_CASE("training aborts on numeric blowup with the failing epoch") {
  const GraphBundle b = generate_sbm(2, 10, 0.4, 0.05, 6, 1.0, 3);
  TrainConfig config;
  config.hidden_width = 8;
  config.embed_width = 4;
  config.rank_ratio = 0.4;
  config.epochs = 50;
  config.step_size = 1e18;
  config.seed = 4;
  try {
    train_encoder(b, config);
    FAIL("expected a numeric abort");
  } catch (const numeric_error& e) {
    REQUIRE(e.epoch >= 1);
  } catch (const degenerate_input_error&) {
    // A blown-up step can also zero out rows; both aborts are acceptable.
  }
}

TEST_CASE("loss trace CSV carries the component columns") {
  std::vector<EpochStats> trace = {{1, 3.0, 1.5, 1.0, 5.0}, {2, 2.5, 1.2, 0.9, 4.0}};
  std::ostringstream out;
  write_loss_trace_csv(trace, out);
  REQUIRE(out.str().rfind("epoch,total,node,proto,tnn\n", 0) == 0);
  REQUIRE(out.str().find("\n1,3,1.5,1,5\n") != std::string::npos);
}
