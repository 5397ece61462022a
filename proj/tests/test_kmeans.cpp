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

#include <catch_amalgamated.hpp>

#include "gcllrr/kmeans.hpp"
#include "test_util.hpp"

using namespace gcllrr;

namespace {

/// Optimal 2-means objective by enumerating every assignment.
double best_two_means_wcss(const Matrix& points) {
  const Index n = points.rows();
  double best = std::numeric_limits<double>::infinity();
  for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
    Matrix sums = Matrix::Zero(2, points.cols());
    Index counts[2] = {0, 0};
    for (Index i = 0; i < n; ++i) {
      const int k = (mask >> i) & 1u;
      sums.row(k) += points.row(i);
      ++counts[k];
    }
    if (counts[0] == 0 || counts[1] == 0) continue;
    Matrix means(2, points.cols());
    means.row(0) = sums.row(0) / static_cast<double>(counts[0]);
    means.row(1) = sums.row(1) / static_cast<double>(counts[1]);
    double wcss = 0.0;
    for (Index i = 0; i < n; ++i) {
      const int k = (mask >> i) & 1u;
      wcss += (points.row(i) - means.row(k)).squaredNorm();
    }
    best = std::min(best, wcss);
  }
  return best;
}

double wcss_of(const Matrix& points, const PrototypeSet& p) {
  double wcss = 0.0;
  for (Index i = 0; i < points.rows(); ++i)
    wcss += (points.row(i) - p.prototypes.row(p.assignments[static_cast<std::size_t>(i)]))
                .squaredNorm();
  return wcss;
}

}  // namespace

TEST_CASE("two separated pairs cluster optimally") {
  Matrix points(4, 2);
  points << 0, 0, 0, 1, 10, 0, 10, 1;
  const PrototypeSet p = cluster_prototypes(points, 2, 7);
  REQUIRE_THAT(wcss_of(points, p),
               Catch::Matchers::WithinAbs(best_two_means_wcss(points), 1e-9));
  std::vector<double> xs = {p.prototypes(0, 0), p.prototypes(1, 0)};
  std::sort(xs.begin(), xs.end());
  REQUIRE_THAT(xs[0], Catch::Matchers::WithinAbs(0.0, 1e-9));
  REQUIRE_THAT(xs[1], Catch::Matchers::WithinAbs(10.0, 1e-9));
  REQUIRE_THAT(p.prototypes(0, 1), Catch::Matchers::WithinAbs(0.5, 1e-9));
  REQUIRE_THAT(p.prototypes(1, 1), Catch::Matchers::WithinAbs(0.5, 1e-9));
}

TEST_CASE("as many clusters as points makes every point its own prototype") {
  const Matrix points = testutil::random_matrix(6, 3, 3);
  const PrototypeSet p = cluster_prototypes(points, 6, 1);
  for (Index size : p.cluster_sizes) REQUIRE(size == 1);
  for (Index i = 0; i < 6; ++i) {
    const Index k = p.assignments[static_cast<std::size_t>(i)];
    REQUIRE((points.row(i) - p.prototypes.row(k)).norm() <= 1e-12);
  }
}

TEST_CASE("within-cluster sum of squares never increases across iterations") {
  const Matrix points = testutil::random_matrix(40, 4, 5);
  std::vector<double> log;
  cluster_prototypes(points, 5, 11, &log);
  REQUIRE(log.size() >= 2);
  for (std::size_t i = 1; i < log.size(); ++i) REQUIRE(log[i] <= log[i - 1] + 1e-9);
}

TEST_CASE("prototypes are the exact means of their clusters") {
  const Matrix points = testutil::random_matrix(30, 3, 9);
  const PrototypeSet p = cluster_prototypes(points, 4, 2);
  Matrix sums = Matrix::Zero(4, 3);
  std::vector<Index> counts(4, 0);
  for (Index i = 0; i < 30; ++i) {
    const Index k = p.assignments[static_cast<std::size_t>(i)];
    REQUIRE(k >= 0);
    REQUIRE(k < 4);
    sums.row(k) += points.row(i);
    ++counts[static_cast<std::size_t>(k)];
  }
  for (Index k = 0; k < 4; ++k) {
    REQUIRE(counts[static_cast<std::size_t>(k)] == p.cluster_sizes[static_cast<std::size_t>(k)]);
    REQUIRE(counts[static_cast<std::size_t>(k)] >= 1);
    const Matrix mean = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
    REQUIRE((mean - p.prototypes.row(k)).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("converged assignments are locally optimal") {
  // Three well separated blobs.
  Rng rng(17);
  Matrix points(30, 2);
  for (Index i = 0; i < 30; ++i) {
    const double cx = 20.0 * static_cast<double>(i / 10);
    points(i, 0) = cx + 0.5 * rng.normal();
    points(i, 1) = 0.5 * rng.normal();
  }
  const PrototypeSet p = cluster_prototypes(points, 3, 23);
  for (Index i = 0; i < 30; ++i) {
    const Index own = p.assignments[static_cast<std::size_t>(i)];
    const double own_d = (points.row(i) - p.prototypes.row(own)).squaredNorm();
    for (Index k = 0; k < 3; ++k) {
      if (k != own) REQUIRE(own_d <= (points.row(i) - p.prototypes.row(k)).squaredNorm());
    }
  }
}

TEST_CASE("cluster count is validated") {
  const Matrix points = testutil::random_matrix(4, 2, 13);
  REQUIRE_THROWS_AS(cluster_prototypes(points, 5, 1), parameter_error);
  REQUIRE_THROWS_AS(cluster_prototypes(points, 0, 1), parameter_error);
}

TEST_CASE("clustering is deterministic given the seed") {
  const Matrix points = testutil::random_matrix(25, 4, 19);
  const PrototypeSet a = cluster_prototypes(points, 3, 4);
  const PrototypeSet b = cluster_prototypes(points, 3, 4);
  REQUIRE(a.assignments == b.assignments);
  REQUIRE(a.prototypes == b.prototypes);
}
