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

#pragma once

#include <cmath>
#include <cstdint>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gcllrr/graph.hpp"
#include "gcllrr/kmeans.hpp"
#include "gcllrr/noise.hpp"
#include "gcllrr/rng.hpp"
#include "gcllrr/spectral.hpp"
#include "gcllrr/text_io.hpp"

namespace gcllrr {

/// Weights of the two-layer graph convolutional encoder.
struct EncoderParams {
  Matrix w0;  // D x hidden
  Matrix w1;  // hidden x embed
};

/// Graph view corruption: edge perturbation swaps edges for non-edges,
/// attribute masking zeroes whole feature columns, node dropping zeroes a
/// node's features and detaches its edges (rows are kept so that the i-th
/// row of both views always refers to the same node).
struct AugmentationSpec {
  double edge_perturb_ratio = 0.2;
  double feature_mask_ratio = 0.2;
  double node_drop_ratio = 0.0;
  std::uint64_t seed = 0;
};

struct TrainConfig {
  Index hidden_width = 64;
  Index embed_width = 32;
  double tnn_weight = 0.10;       // weight of the TNN term
  double rank_ratio = 0.2;        // target rank as a fraction of min(N, d)
  double node_temperature = 0.5;
  double proto_temperature = 0.5;
  Index num_clusters = 0;         // 0 means one cluster per class
  Index epochs = 200;
  double step_size = 1e-2;
  double edge_perturb_ratio = 0.2;
  double feature_mask_ratio = 0.2;
  double node_drop_ratio = 0.0;
  std::uint64_t seed = 0;

  Index target_rank(Index num_nodes) const {
    const Index bound = std::min(num_nodes, embed_width);
    return static_cast<Index>(std::ceil(rank_ratio * static_cast<double>(bound)));
  }
  Index clusters_for(Index num_classes) const {
    return num_clusters > 0 ? num_clusters : num_classes;
  }
};

inline void validate_train_config(const TrainConfig& c, const GraphBundle& b) {
  if (c.hidden_width < 1 || c.embed_width < 1)
    throw parameter_error("train config: widths must be positive");
  if (c.node_temperature <= 0.0 || c.proto_temperature <= 0.0)
    throw parameter_error("train config: temperatures must be positive");
  if (c.step_size <= 0.0) throw parameter_error("train config: step size must be positive");
  if (c.tnn_weight < 0.0) throw parameter_error("train config: tnn weight must be nonnegative");
  if (!(c.rank_ratio > 0.0 && c.rank_ratio <= 1.0))
    throw parameter_error("train config: rank ratio must lie in (0, 1]");
  if (c.epochs < 0) throw parameter_error("train config: epochs must be nonnegative");
  for (double r : {c.edge_perturb_ratio, c.feature_mask_ratio, c.node_drop_ratio}) {
    if (!(r >= 0.0 && r <= 1.0))
      throw parameter_error("train config: augmentation ratios must lie in [0, 1]");
  }
  const Index bound = std::min(b.num_nodes, c.embed_width);
  if (c.target_rank(b.num_nodes) >= bound)
    throw parameter_error("train config: target rank must stay below min(N, embed_width)");
  const Index k = c.clusters_for(b.num_classes);
  if (k < 1 || k > b.num_nodes)
    throw parameter_error("train config: cluster count must lie in [1, N]");
}

// ---------------------------------------------------------------------------
// GCN forward/backward

struct GcnActivations {
  Matrix ax;      // A_hat X
  Matrix z1;      // A_hat X W0
  Matrix hidden;  // relu(z1)
  Matrix ah;      // A_hat hidden
  Matrix z2;      // A_hat hidden W1
  Matrix embeddings;  // relu(z2)
};

inline GcnActivations gcn_forward_cached(const EncoderParams& p, const Matrix& features,
                                         const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols() || adjacency.rows() != features.rows())
    throw contract_error("gcn_forward: adjacency and features disagree on N");
  if (p.w0.rows() != features.cols() || p.w1.rows() != p.w0.cols())
    throw contract_error("gcn_forward: weight shapes do not chain");
  GcnActivations a;
  a.ax = adjacency * features;
  a.z1 = a.ax * p.w0;
  a.hidden = a.z1.cwiseMax(0.0);
  a.ah = adjacency * a.hidden;
  a.z2 = a.ah * p.w1;
  a.embeddings = a.z2.cwiseMax(0.0);
  return a;
}

/// H = relu(A_hat relu(A_hat X W0) W1).
inline Matrix gcn_forward(const EncoderParams& p, const Matrix& features,
                          const Matrix& adjacency) {
  return gcn_forward_cached(p, features, adjacency).embeddings;
}

/// Accumulates d(loss)/dW0 and d(loss)/dW1 given d(loss)/dH. Relies on the
/// adjacency being symmetric.
inline void gcn_backward(const GcnActivations& a, const Matrix& adjacency,
                         const EncoderParams& p, const Matrix& grad_embeddings,
                         Matrix& grad_w0, Matrix& grad_w1) {
  const Matrix dz2 =
      grad_embeddings.cwiseProduct((a.z2.array() > 0.0).cast<double>().matrix());
  grad_w1 += a.ah.transpose() * dz2;
  const Matrix dhidden = adjacency * (dz2 * p.w1.transpose());
  const Matrix dz1 = dhidden.cwiseProduct((a.z1.array() > 0.0).cast<double>().matrix());
  grad_w0 += a.ax.transpose() * dz1;
}

// ---------------------------------------------------------------------------
// Augmented views

struct AugmentedView {
  Matrix features;   // X'
  Matrix adjacency;  // normalized A_hat'
};

inline AugmentedView augment_view(const GraphBundle& b, const AugmentationSpec& spec) {
  for (double r : {spec.edge_perturb_ratio, spec.feature_mask_ratio, spec.node_drop_ratio}) {
    if (!(r >= 0.0 && r <= 1.0))
      throw parameter_error("augment_view: ratios must lie in [0, 1]");
  }
  Rng rng(spec.seed);
  const Index n = b.num_nodes;
  const Index d = b.num_features;

  std::set<Edge> edges(b.edges.begin(), b.edges.end());

  // Edge perturbation: drop k edges, add k non-edges.
  const Index k_edges = static_cast<Index>(
      std::ceil(spec.edge_perturb_ratio * static_cast<double>(b.edges.size())));
  if (k_edges > 0 && !b.edges.empty()) {
    const auto drop = rng.sample_without_replacement(static_cast<Index>(b.edges.size()), k_edges);
    for (const auto idx : drop) edges.erase(b.edges[static_cast<std::size_t>(idx)]);

    const Index total_pairs = n * (n - 1) / 2;
    const Index available = total_pairs - static_cast<Index>(b.edges.size());
    Index to_add = std::min(k_edges, available);
    std::set<Edge> original(b.edges.begin(), b.edges.end());
    while (to_add > 0) {
      Index i = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      Index j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
      if (i == j) continue;
      if (i > j) std::swap(i, j);
      const Edge e{i, j};
      if (original.count(e) || edges.count(e)) continue;
      edges.insert(e);
      --to_add;
    }
  }

  // Node dropping: zero features and detach edges, keep the row.
  std::vector<bool> dropped(static_cast<std::size_t>(n), false);
  const Index k_nodes =
      static_cast<Index>(std::ceil(spec.node_drop_ratio * static_cast<double>(n)));
  if (k_nodes > 0) {
    for (const auto idx : rng.sample_without_replacement(n, k_nodes))
      dropped[static_cast<std::size_t>(idx)] = true;
    for (auto it = edges.begin(); it != edges.end();) {
      if (dropped[static_cast<std::size_t>(it->first)] ||
          dropped[static_cast<std::size_t>(it->second)]) {
        it = edges.erase(it);
      } else {
        ++it;
      }
    }
  }

  // Attribute masking: zero whole columns.
  Matrix x = b.features;
  const Index k_cols =
      static_cast<Index>(std::ceil(spec.feature_mask_ratio * static_cast<double>(d)));
  if (k_cols > 0) {
    for (const auto col : rng.sample_without_replacement(d, k_cols))
      x.col(col).setZero();
  }
  for (Index i = 0; i < n; ++i) {
    if (dropped[static_cast<std::size_t>(i)]) x.row(i).setZero();
  }

  GraphBundle view;
  view.num_nodes = n;
  view.num_features = d;
  view.num_classes = b.num_classes;
  view.edges.assign(edges.begin(), edges.end());
  view.features = x;
  view.clean_labels = b.clean_labels;
  Matrix adjacency = normalize_adjacency(view).matrix;
  return AugmentedView{std::move(x), std::move(adjacency)};
}

// ---------------------------------------------------------------------------
// Contrastive losses

struct NodeContrastiveLoss {
  double value;
  Matrix grad_view1;
  Matrix grad_view2;
};

/// InfoNCE over cosine similarities: the i-th row of view 1 is pulled toward
/// the i-th row of view 2 and pushed from all other rows of view 2.
inline NodeContrastiveLoss contrastive_loss_node(const Matrix& h1, const Matrix& h2,
                                                 double temperature) {
  if (h1.rows() != h2.rows() || h1.cols() != h2.cols())
    throw contract_error("contrastive_loss_node: view shapes differ");
  if (temperature <= 0.0)
    throw parameter_error("contrastive_loss_node: temperature must be positive");
  const Index n = h1.rows();

  const Vector n1 = h1.rowwise().norm();
  const Vector n2 = h2.rowwise().norm();
  if ((n1.array() == 0.0).any() || (n2.array() == 0.0).any())
    throw degenerate_input_error("contrastive_loss_node: zero row makes cosine undefined");

  const Matrix a = n1.cwiseInverse().asDiagonal() * h1;  // normalized rows
  const Matrix b = n2.cwiseInverse().asDiagonal() * h2;

  const Matrix z = (a * b.transpose()) / temperature;  // N x N logits
  const Vector row_max = z.rowwise().maxCoeff();
  const Matrix shifted = z.colwise() - row_max;
  const Matrix ez = shifted.array().exp().matrix();
  const Vector denom = ez.rowwise().sum();

  double loss = 0.0;
  for (Index i = 0; i < n; ++i) {
    loss += std::log(denom(i)) + row_max(i) - z(i, i);
  }
  loss /= static_cast<double>(n);

  Matrix g = ez.array().colwise() / denom.array();  // softmax probabilities
  g.diagonal().array() -= 1.0;
  g /= static_cast<double>(n) * temperature;

  const Matrix ga = g * b;              // d(loss)/d(normalized a)
  const Matrix gb = g.transpose() * a;  // d(loss)/d(normalized b)

  // Pull the gradient back through the row normalization.
  const Vector dot_a = (ga.array() * a.array()).rowwise().sum();
  const Vector dot_b = (gb.array() * b.array()).rowwise().sum();
  Matrix grad1 = (ga - dot_a.asDiagonal() * a);
  Matrix grad2 = (gb - dot_b.asDiagonal() * b);
  grad1 = n1.cwiseInverse().asDiagonal() * grad1;
  grad2 = n2.cwiseInverse().asDiagonal() * grad2;

  return NodeContrastiveLoss{loss, std::move(grad1), std::move(grad2)};
}

struct ProtoContrastiveLoss {
  double value;
  Matrix grad;
};

/// Softmax cross-entropy of each embedding against its cluster prototype,
/// with the prototypes treated as constants.
inline ProtoContrastiveLoss contrastive_loss_proto(const Matrix& h, const PrototypeSet& protos,
                                                   double temperature) {
  if (temperature <= 0.0)
    throw parameter_error("contrastive_loss_proto: temperature must be positive");
  const Index n = h.rows();
  const Index k = protos.prototypes.rows();
  if (static_cast<Index>(protos.assignments.size()) != n)
    throw contract_error("contrastive_loss_proto: assignments must cover all nodes");
  for (Index size : protos.cluster_sizes) {
    if (size < 1) throw contract_error("contrastive_loss_proto: empty cluster");
  }

  const Matrix z = (h * protos.prototypes.transpose()) / temperature;  // N x K
  const Vector row_max = z.rowwise().maxCoeff();
  const Matrix ez = (z.colwise() - row_max).array().exp().matrix();
  const Vector denom = ez.rowwise().sum();

  double loss = 0.0;
  Matrix g = ez.array().colwise() / denom.array();
  for (Index i = 0; i < n; ++i) {
    const Index own = protos.assignments[static_cast<std::size_t>(i)];
    if (own < 0 || own >= k) throw contract_error("contrastive_loss_proto: assignment out of range");
    loss += std::log(denom(i)) + row_max(i) - z(i, own);
    g(i, own) -= 1.0;
  }
  loss /= static_cast<double>(n);
  Matrix grad = (g * protos.prototypes) / (static_cast<double>(n) * temperature);
  return ProtoContrastiveLoss{loss, std::move(grad)};
}

// ---------------------------------------------------------------------------
// Composite loss and training

// Per-epoch seed streams: two augmented views and the k-means seeding.
namespace aug_salt {
inline constexpr std::uint64_t kView1 = 0xA1;
inline constexpr std::uint64_t kView2 = 0xA2;
inline constexpr std::uint64_t kProto = 0xA3;
}  // namespace aug_salt

struct LossBreakdown {
  double total = 0.0;
  double node = 0.0;
  double proto = 0.0;
  double tnn = 0.0;  // unweighted tail sum; total adds tnn_weight * tnn
  Matrix grad_w0;
  Matrix grad_w1;
  bool tnn_degenerate = false;
};

/// One evaluation of the full training objective
///   L = L_node(view1, view2) + L_proto(H) + tnn_weight * ||gram(H)||_{r0}
/// with the node term on two freshly augmented views and the prototype and
/// TNN terms on the clean forward pass. Gradients flow to both weight
/// matrices through every path; prototypes are constants (recomputed from H
/// unless `fixed_protos` pins them, which is what a finite-difference check
/// of the stop-gradient objective needs).
inline LossBreakdown gcl_lrr_loss(const GraphBundle& bundle, const Matrix& adjacency,
                                  const EncoderParams& params, const TrainConfig& config,
                                  std::uint64_t epoch_seed,
                                  const PrototypeSet* fixed_protos = nullptr) {
  validate_train_config(config, bundle);

  const GcnActivations clean = gcn_forward_cached(params, bundle.features, adjacency);

  AugmentationSpec aug;
  aug.edge_perturb_ratio = config.edge_perturb_ratio;
  aug.feature_mask_ratio = config.feature_mask_ratio;
  aug.node_drop_ratio = config.node_drop_ratio;

  aug.seed = derive_seed(epoch_seed, aug_salt::kView1);
  const AugmentedView v1 = augment_view(bundle, aug);
  aug.seed = derive_seed(epoch_seed, aug_salt::kView2);
  const AugmentedView v2 = augment_view(bundle, aug);

  const GcnActivations act1 = gcn_forward_cached(params, v1.features, v1.adjacency);
  const GcnActivations act2 = gcn_forward_cached(params, v2.features, v2.adjacency);

  const NodeContrastiveLoss node =
      contrastive_loss_node(act1.embeddings, act2.embeddings, config.node_temperature);

  PrototypeSet local_protos;
  const PrototypeSet* protos = fixed_protos;
  if (protos == nullptr) {
    local_protos = cluster_prototypes(clean.embeddings, config.clusters_for(bundle.num_classes),
                                      derive_seed(epoch_seed, aug_salt::kProto));
    protos = &local_protos;
  }
  const ProtoContrastiveLoss proto =
      contrastive_loss_proto(clean.embeddings, *protos, config.proto_temperature);

  const Index r0 = config.target_rank(bundle.num_nodes);
  const double tnn_value = tnn_features(clean.embeddings, r0);
  const TnnGradient tnn_grad = tnn_gradient(clean.embeddings, r0);

  LossBreakdown out;
  out.node = node.value;
  out.proto = proto.value;
  out.tnn = tnn_value;
  out.total = node.value + proto.value + config.tnn_weight * tnn_value;
  out.tnn_degenerate = tnn_grad.degenerate;
  out.grad_w0 = Matrix::Zero(params.w0.rows(), params.w0.cols());
  out.grad_w1 = Matrix::Zero(params.w1.rows(), params.w1.cols());

  const Matrix grad_clean = proto.grad + config.tnn_weight * tnn_grad.grad;
  gcn_backward(clean, adjacency, params, grad_clean, out.grad_w0, out.grad_w1);
  gcn_backward(act1, v1.adjacency, params, node.grad_view1, out.grad_w0, out.grad_w1);
  gcn_backward(act2, v2.adjacency, params, node.grad_view2, out.grad_w0, out.grad_w1);
  return out;
}

struct EpochStats {
  Index epoch;
  double total;
  double node;
  double proto;
  double tnn;
};

struct TrainResult {
  EncoderParams params;
  std::vector<EpochStats> trace;
};

inline EncoderParams init_encoder_params(Index num_features, const TrainConfig& config) {
  Rng rng(config.seed);
  EncoderParams p;
  p.w0 = Matrix(num_features, config.hidden_width);
  p.w1 = Matrix(config.hidden_width, config.embed_width);
  const double a0 = std::sqrt(6.0 / static_cast<double>(num_features + config.hidden_width));
  const double a1 =
      std::sqrt(6.0 / static_cast<double>(config.hidden_width + config.embed_width));
  for (Index i = 0; i < p.w0.rows(); ++i)
    for (Index j = 0; j < p.w0.cols(); ++j) p.w0(i, j) = a0 * (2.0 * rng.uniform() - 1.0);
  for (Index i = 0; i < p.w1.rows(); ++i)
    for (Index j = 0; j < p.w1.cols(); ++j) p.w1(i, j) = a1 * (2.0 * rng.uniform() - 1.0);
  return p;
}

/// Full-batch gradient descent on the composite objective. Per epoch: clean
/// forward pass, two augmented views, fresh k-means prototypes, TNN through
/// the embedding spectrum, one step on both weight matrices.
inline TrainResult train_encoder(const GraphBundle& bundle, const TrainConfig& config) {
  validate_bundle(bundle);
  validate_train_config(config, bundle);

  const Matrix adjacency = normalize_adjacency(bundle).matrix;
  TrainResult result;
  result.params = init_encoder_params(bundle.num_features, config);

  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    if (!result.params.w0.allFinite() || !result.params.w1.allFinite()) {
      throw numeric_error(
          "train_encoder: non-finite parameters at epoch " + std::to_string(epoch),
          static_cast<long>(epoch));
    }
    const std::uint64_t epoch_seed = derive_seed(config.seed, 0xE000 + static_cast<std::uint64_t>(epoch));
    LossBreakdown lb;
    try {
      lb = gcl_lrr_loss(bundle, adjacency, result.params, config, epoch_seed);
    } catch (const degenerate_input_error& e) {
      // A strong TNN pull can shrink a weak node's embedding until its ReLU
      // row dies, at which point the cosine loss is undefined. Surface the
      // epoch like the non-finite abort does.
      throw numeric_error(
          "train_encoder: degenerate embeddings at epoch " + std::to_string(epoch) + " (" +
              e.what() + "); a smaller tnn_weight, wider embedding, or another seed avoids this",
          static_cast<long>(epoch));
    }
    if (!std::isfinite(lb.total)) {
      throw numeric_error("train_encoder: non-finite loss at epoch " + std::to_string(epoch),
                          static_cast<long>(epoch));
    }
    result.params.w0 -= config.step_size * lb.grad_w0;
    result.params.w1 -= config.step_size * lb.grad_w1;
    result.trace.push_back(EpochStats{epoch, lb.total, lb.node, lb.proto, lb.tnn});
  }
  return result;
}

inline void write_loss_trace_csv(const std::vector<EpochStats>& trace, std::ostream& out) {
  out << "epoch,total,node,proto,tnn\n";
  for (const EpochStats& e : trace) {
    out << e.epoch << ',' << format_double(e.total) << ',' << format_double(e.node) << ','
        << format_double(e.proto) << ',' << format_double(e.tnn) << '\n';
  }
}

}  // namespace gcllrr
