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

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gcllrr/graph.hpp"
#include "gcllrr/matrix.hpp"
#include "gcllrr/rng.hpp"

namespace testutil {

inline gcllrr::Matrix random_matrix(gcllrr::Index rows, gcllrr::Index cols, std::uint64_t seed,
                                    double lo = -1.0, double hi = 1.0) {
  gcllrr::Rng rng(seed);
  gcllrr::Matrix m(rows, cols);
  for (gcllrr::Index i = 0; i < rows; ++i)
    for (gcllrr::Index j = 0; j < cols; ++j) m(i, j) = lo + (hi - lo) * rng.uniform();
  return m;
}

inline gcllrr::Matrix random_one_hot(gcllrr::Index rows, gcllrr::Index classes,
                                     std::uint64_t seed) {
  gcllrr::Rng rng(seed);
  std::vector<gcllrr::Index> labels(static_cast<std::size_t>(rows));
  for (auto& l : labels) l = static_cast<gcllrr::Index>(rng.below(classes));
  return gcllrr::one_hot_labels(labels, classes);
}

/// Central finite differences of a scalar function of a matrix.
template <class F>
gcllrr::Matrix fd_gradient(F&& f, gcllrr::Matrix x, double step = 1e-5) {
  gcllrr::Matrix g(x.rows(), x.cols());
  for (gcllrr::Index i = 0; i < x.rows(); ++i) {
    for (gcllrr::Index j = 0; j < x.cols(); ++j) {
      const double orig = x(i, j);
      x(i, j) = orig + step;
      const double fp = f(x);
      x(i, j) = orig - step;
      const double fm = f(x);
      x(i, j) = orig;
      g(i, j) = (fp - fm) / (2.0 * step);
    }
  }
  return g;
}

inline double relative_error(const gcllrr::Matrix& approx, const gcllrr::Matrix& exact) {
  const double denom = std::max(exact.norm(), 1e-12);
  return (approx - exact).norm() / denom;
}

/// Unique scratch directory, removed on destruction.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("gcllrr_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter++));
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline void write_file(const std::filesystem::path& p, const std::string& content) {
  std::ofstream out(p, std::ios::binary);
  out << content;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace testutil
