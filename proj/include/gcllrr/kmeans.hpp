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

#include "gcllrr/errors.hpp"
#include "gcllrr/matrix.hpp"
#include "gcllrr/rng.hpp"

namespace gcllrr {

/// K-means clustering result. Each prototype is the exact mean of its
/// assigned rows, and every cluster is nonempty.
struct PrototypeSet {
  Matrix prototypes;               // K x d
  std::vector<Index> assignments;  // per node, in [0, K)
  std::vector<Index> cluster_sizes;
};

namespace detail {

inline Index nearest_center(const Matrix& points, const Matrix& centers, Index i) {
  Index best = 0;
  double best_d = (points.row(i) - centers.row(0)).squaredNorm();
  for (Index k = 1; k < centers.rows(); ++k) {
    const double d = (points.row(i) - centers.row(k)).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

inline Matrix kmeanspp_seeds(const Matrix& points, Index k, Rng& rng) {
  const Index n = points.rows();
  Matrix centers(k, points.cols());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);

  const Index first = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  centers.row(0) = points.row(first);
  chosen[static_cast<std::size_t>(first)] = true;

  Vector dist2(n);
  for (Index i = 0; i < n; ++i) dist2(i) = (points.row(i) - centers.row(0)).squaredNorm();

  for (Index c = 1; c < k; ++c) {
    const double total = dist2.sum();
    Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        acc += dist2(i);
        if (acc > target) {
          pick = i;
          break;
        }
      }
      if (pick < 0) {
        for (Index i = n - 1; i >= 0; --i) {
          if (dist2(i) > 0.0) {
            pick = i;
            break;
          }
        }
      }
    }
    if (pick < 0) {
      // All remaining points coincide with chosen centers; take the first
      // unchosen index.
      for (Index i = 0; i < n; ++i) {
        if (!chosen[static_cast<std::size_t>(i)]) {
          pick = i;
          break;
        }
      }
    }
    centers.row(c) = points.row(pick);
    chosen[static_cast<std::size_t>(pick)] = true;
    for (Index i = 0; i < n; ++i) {
      const double d = (points.row(i) - centers.row(c)).squaredNorm();
      if (d < dist2(i)) dist2(i) = d;
    }
  }
  return centers;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding. Runs at most 100 iterations or
/// until the maximum centroid shift drops below 1e-8; an empty cluster is
/// re-seeded to the point farthest from its own centroid. Assignment ties
/// break toward the lower cluster index. Deterministic given the seed.
///
/// When `wcss_log` is given, the within-cluster sum of squares (measured
/// against the centers the assignment was made with) is appended once per
/// iteration.
inline PrototypeSet cluster_prototypes(const Matrix& points, Index num_clusters,
                                       std::uint64_t seed,
                                       std::vector<double>* wcss_log = nullptr) {
  const Index n = points.rows();
  if (num_clusters < 1 || num_clusters > n)
    throw parameter_error("cluster_prototypes: cluster count must lie in [1, N]");

  Rng rng(seed);
  Matrix centers = detail::kmeanspp_seeds(points, num_clusters, rng);

  std::vector<Index> assignments(static_cast<std::size_t>(n), 0);
  std::vector<Index> sizes(static_cast<std::size_t>(num_clusters), 0);

  constexpr int kMaxIterations = 100;
  constexpr double kShiftTol = 1e-8;

  for (int iter = 0; iter < kMaxIterations; ++iter) {
    std::fill(sizes.begin(), sizes.end(), Index{0});
    double wcss = 0.0;
    for (Index i = 0; i < n; ++i) {
      const Index k = detail::nearest_center(points, centers, i);
      assignments[static_cast<std::size_t>(i)] = k;
      ++sizes[static_cast<std::size_t>(k)];
      wcss += (points.row(i) - centers.row(k)).squaredNorm();
    }
    if (wcss_log != nullptr) wcss_log->push_back(wcss);

    for (Index k = 0; k < num_clusters; ++k) {
      if (sizes[static_cast<std::size_t>(k)] > 0) continue;
      // Re-seed to the farthest point whose cluster can spare it.
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const Index owner = assignments[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(owner)] < 2) continue;
        const double d = (points.row(i) - centers.row(owner)).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far < 0) throw numeric_error("cluster_prototypes: cannot repopulate empty cluster");
      --sizes[static_cast<std::size_t>(assignments[static_cast<std::size_t>(far)])];
      assignments[static_cast<std::size_t>(far)] = k;
      sizes[static_cast<std::size_t>(k)] = 1;
      centers.row(k) = points.row(far);
    }

    Matrix new_centers = Matrix::Zero(num_clusters, points.cols());
    for (Index i = 0; i < n; ++i)
      new_centers.row(assignments[static_cast<std::size_t>(i)]) += points.row(i);
    for (Index k = 0; k < num_clusters; ++k)
      new_centers.row(k) /= static_cast<double>(sizes[static_cast<std::size_t>(k)]);

    const double shift = (new_centers - centers).rowwise().norm().maxCoeff();
    centers = new_centers;
    if (shift < kShiftTol) break;
  }

  return PrototypeSet{std::move(centers), std::move(assignments), std::move(sizes)};
}

}  // namespace gcllrr
