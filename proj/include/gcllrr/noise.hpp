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
#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "gcllrr/graph.hpp"
#include "gcllrr/matrix.hpp"
#include "gcllrr/rng.hpp"

namespace gcllrr {

enum class NoiseKind { symmetric, asymmetric };

inline NoiseKind parse_noise_kind(std::string_view s) {
  if (s == "symmetric") return NoiseKind::symmetric;
  if (s == "asymmetric") return NoiseKind::asymmetric;
  throw parameter_error("unknown noise kind '" + std::string(s) + "'");
}

inline std::string to_string(NoiseKind k) {
  return k == NoiseKind::symmetric ? "symmetric" : "asymmetric";
}

/// Row-stochastic label-corruption model. Row i gives the distribution of
/// the observed class when the clean class is i; the diagonal is 1 - rate.
struct TransitionMatrix {
  Matrix matrix;  // C x C
  NoiseKind kind;
  double rate;
};

/// Symmetric noise spreads the flip mass uniformly over the other classes;
/// asymmetric noise flips class c to (c + 1) mod C with probability rate.
inline TransitionMatrix build_transition_matrix(NoiseKind kind, double rate, Index num_classes) {
  if (num_classes < 2) throw parameter_error("transition matrix needs at least 2 classes");
  if (!(rate >= 0.0 && rate <= 1.0)) throw parameter_error("noise rate must lie in [0, 1]");
  Matrix t = Matrix::Zero(num_classes, num_classes);
  for (Index i = 0; i < num_classes; ++i) {
    t(i, i) = 1.0 - rate;
    if (kind == NoiseKind::symmetric) {
      const double off = rate / static_cast<double>(num_classes - 1);
      for (Index j = 0; j < num_classes; ++j) {
        if (j != i) t(i, j) = off;
      }
    } else {
      t(i, (i + 1) % num_classes) += rate;
    }
  }
  return TransitionMatrix{std::move(t), kind, rate};
}

/// Observed one-hot labels plus the additive noise matrix; observed - noise
/// recovers the clean labels exactly.
struct NoisyLabels {
  Matrix observed;
  Matrix noise;
};

/// Samples each node's observed class independently from the transition row
/// of its clean class.
inline NoisyLabels inject_label_noise(const Matrix& clean_labels, const TransitionMatrix& t,
                                      std::uint64_t seed) {
  const Index n = clean_labels.rows();
  const Index c = clean_labels.cols();
  if (t.matrix.rows() != c || t.matrix.cols() != c)
    throw contract_error("inject_label_noise: transition matrix shape mismatch");
  Rng rng(seed);
  Matrix observed = Matrix::Zero(n, c);
  for (Index i = 0; i < n; ++i) {
    Index clean_class = 0;
    clean_labels.row(i).maxCoeff(&clean_class);
    const double u = rng.uniform();
    double cum = 0.0;
    Index sampled = c - 1;
    for (Index j = 0; j < c; ++j) {
      cum += t.matrix(clean_class, j);
      if (u < cum) {
        sampled = j;
        break;
      }
    }
    observed(i, sampled) = 1.0;
  }
  Matrix noise = observed - clean_labels;
  return NoisyLabels{std::move(observed), std::move(noise)};
}

/// For every node, picks ceil(ratio * D) feature slots without replacement
/// and applies a uniform random permutation to the values in those slots.
/// The per-row value multiset is preserved.
inline Matrix inject_attribute_noise(const Matrix& features, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw parameter_error("attribute noise ratio must lie in [0, 1]");
  const Index d = features.cols();
  const Index k = static_cast<Index>(std::ceil(ratio * static_cast<double>(d)));
  Matrix out = features;
  if (k == 0) return out;
  Rng rng(seed);
  for (Index i = 0; i < features.rows(); ++i) {
    auto slots = rng.sample_without_replacement(d, k);
    std::sort(slots.begin(), slots.end());
    std::vector<std::int64_t> perm(static_cast<std::size_t>(k));
    for (std::int64_t j = 0; j < k; ++j) perm[static_cast<std::size_t>(j)] = j;
    rng.shuffle(perm);
    for (std::int64_t j = 0; j < k; ++j) {
      out(i, slots[static_cast<std::size_t>(j)]) =
          features(i, slots[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])]);
    }
  }
  return out;
}

}  // namespace gcllrr
