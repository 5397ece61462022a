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

#include <algorithm>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gcllrr/errors.hpp"
#include "gcllrr/matrix.hpp"
#include "gcllrr/rng.hpp"

namespace gcllrr {

/// Undirected edge stored with the smaller endpoint first.
using Edge = std::pair<Index, Index>;

/// Attributed graph with one-hot ground-truth labels.
///
/// Invariants: edges are sorted, unique, self-loop free, with src < dst;
/// every row of clean_labels has exactly one entry equal to 1.
struct GraphBundle {
  Index num_nodes = 0;
  Index num_features = 0;
  Index num_classes = 0;
  std::vector<Edge> edges;
  Matrix features;      // num_nodes x num_features
  Matrix clean_labels;  // num_nodes x num_classes, one-hot

  Index label_of(Index node) const {
    Index best = 0;
    clean_labels.row(node).maxCoeff(&best);
    return best;
  }
};

inline Matrix one_hot_labels(const std::vector<Index>& labels, Index num_classes) {
  Matrix out = Matrix::Zero(static_cast<Index>(labels.size()), num_classes);
  for (Index i = 0; i < out.rows(); ++i) {
    const Index c = labels[static_cast<std::size_t>(i)];
    if (c < 0 || c >= num_classes) throw parameter_error("label out of range");
    out(i, c) = 1.0;
  }
  return out;
}

inline std::vector<Index> argmax_rows(const Matrix& m) {
  std::vector<Index> out(static_cast<std::size_t>(m.rows()));
  for (Index i = 0; i < m.rows(); ++i) {
    Index best = 0;
    double best_v = m(i, 0);
    for (Index j = 1; j < m.cols(); ++j) {
      if (m(i, j) > best_v) {
        best_v = m(i, j);
        best = j;
      }
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

inline void validate_bundle(const GraphBundle& b) {
  if (b.num_nodes < 1) throw parameter_error("bundle: num_nodes must be positive");
  if (b.num_features < 1) throw parameter_error("bundle: num_features must be positive");
  if (b.num_classes < 1) throw parameter_error("bundle: num_classes must be positive");
  if (b.features.rows() != b.num_nodes || b.features.cols() != b.num_features)
    throw parameter_error("bundle: features shape mismatch");
  if (b.clean_labels.rows() != b.num_nodes || b.clean_labels.cols() != b.num_classes)
    throw parameter_error("bundle: labels shape mismatch");
  const Edge* prev = nullptr;
  for (const Edge& e : b.edges) {
    if (e.first < 0 || e.second >= b.num_nodes)
      throw parameter_error("bundle: edge endpoint out of range");
    if (e.first >= e.second)
      throw parameter_error("bundle: edges must satisfy src < dst");
    if (prev != nullptr && !(*prev < e))
      throw parameter_error("bundle: edges must be sorted and unique");
    prev = &e;
  }
  for (Index i = 0; i < b.num_nodes; ++i) {
    Index ones = 0;
    for (Index c = 0; c < b.num_classes; ++c) {
      const double v = b.clean_labels(i, c);
      if (v == 1.0) {
        ++ones;
      } else if (v != 0.0) {
        throw parameter_error("bundle: labels must be one-hot (node " + std::to_string(i) + ")");
      }
    }
    if (ones != 1)
      throw parameter_error("bundle: labels must be one-hot (node " + std::to_string(i) + ")");
  }
}

/// Degree-normalized adjacency with self-loops:
/// A_hat = D~^{-1/2} (A + I) D~^{-1/2}. Built entry-mirrored, hence
/// bit-symmetric; self-loops keep every degree positive.
struct NormalizedAdjacency {
  Matrix matrix;
};

inline NormalizedAdjacency normalize_adjacency(const GraphBundle& b) {
  const Index n = b.num_nodes;
  Matrix a = Matrix::Zero(n, n);
  for (const Edge& e : b.edges) {
    a(e.first, e.second) = 1.0;
    a(e.second, e.first) = 1.0;
  }
  a.diagonal().array() += 1.0;
  Vector inv_sqrt_deg(n);
  for (Index i = 0; i < n; ++i) inv_sqrt_deg(i) = 1.0 / std::sqrt(a.row(i).sum());
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      if (a(i, j) == 0.0) continue;
      const double v = a(i, j) * inv_sqrt_deg(i) * inv_sqrt_deg(j);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return NormalizedAdjacency{std::move(out)};
}

/// Disjoint labeled/unlabeled node index sets covering [0, N).
struct SplitSpec {
  std::vector<Index> labeled;    // sorted ascending
  std::vector<Index> unlabeled;  // sorted ascending
};

inline void validate_split(const SplitSpec& s, Index num_nodes) {
  const Index n = static_cast<Index>(s.labeled.size() + s.unlabeled.size());
  if (n != num_nodes) throw parameter_error("split: sets must cover all nodes");
  std::vector<bool> seen(static_cast<std::size_t>(num_nodes), false);
  for (const auto* set : {&s.labeled, &s.unlabeled}) {
    for (Index i : *set) {
      if (i < 0 || i >= num_nodes) throw parameter_error("split: index out of range");
      if (seen[static_cast<std::size_t>(i)]) throw parameter_error("split: sets must be disjoint");
      seen[static_cast<std::size_t>(i)] = true;
    }
  }
}

/// Samples m labeled nodes uniformly without replacement.
inline SplitSpec sample_split(Index num_nodes, Index labeled_count, std::uint64_t seed) {
  if (labeled_count < 1 || labeled_count >= num_nodes)
    throw parameter_error("sample_split: labeled count must satisfy 1 <= m < N");
  Rng rng(seed);
  const auto picked = rng.sample_without_replacement(num_nodes, labeled_count);
  std::vector<bool> is_labeled(static_cast<std::size_t>(num_nodes), false);
  for (const auto i : picked) is_labeled[static_cast<std::size_t>(i)] = true;
  SplitSpec s;
  s.labeled.reserve(static_cast<std::size_t>(labeled_count));
  s.unlabeled.reserve(static_cast<std::size_t>(num_nodes - labeled_count));
  for (Index i = 0; i < num_nodes; ++i) {
    (is_labeled[static_cast<std::size_t>(i)] ? s.labeled : s.unlabeled).push_back(i);
  }
  return s;
}

inline Matrix select_rows(const Matrix& m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = m.row(rows[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace gcllrr
