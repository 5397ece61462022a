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

#include <cstdint>
#include <vector>

#include "gcllrr/graph.hpp"
#include "gcllrr/rng.hpp"

namespace gcllrr {

/// Stochastic block model with Gaussian class features.
///
/// Every within-block pair is connected with probability p_in and every
/// cross-block pair with probability p_out. Node features are unit-variance
/// Gaussians around a per-class mean feature_shift * e_c, so class means sit
/// on orthogonal axes. Labels are the block identities.
inline GraphBundle generate_sbm(Index blocks, Index per_block, double p_in, double p_out,
                                Index feature_dim, double feature_shift, std::uint64_t seed) {
  if (blocks < 1 || per_block < 1)
    throw parameter_error("generate_sbm: blocks and per_block must be positive");
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0))
    throw parameter_error("generate_sbm: edge probabilities must lie in [0, 1]");
  if (feature_dim < blocks)
    throw parameter_error("generate_sbm: feature_dim must be at least the number of blocks");

  GraphBundle b;
  b.num_nodes = blocks * per_block;
  b.num_features = feature_dim;
  b.num_classes = blocks;

  std::vector<Index> labels(static_cast<std::size_t>(b.num_nodes));
  for (Index i = 0; i < b.num_nodes; ++i) labels[static_cast<std::size_t>(i)] = i / per_block;
  b.clean_labels = one_hot_labels(labels, blocks);

  Rng rng(seed);
  for (Index i = 0; i < b.num_nodes; ++i) {
    for (Index j = i + 1; j < b.num_nodes; ++j) {
      const double p =
          labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)] ? p_in : p_out;
      if (rng.uniform() < p) b.edges.emplace_back(i, j);
    }
  }

  b.features = Matrix(b.num_nodes, feature_dim);
  for (Index i = 0; i < b.num_nodes; ++i) {
    for (Index f = 0; f < feature_dim; ++f) b.features(i, f) = rng.normal();
    b.features(i, labels[static_cast<std::size_t>(i)]) += feature_shift;
  }

  validate_bundle(b);
  return b;
}

}  // namespace gcllrr
