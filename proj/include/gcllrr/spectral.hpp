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
#include <optional>
#include <ostream>
#include <utility>

#include "gcllrr/errors.hpp"
#include "gcllrr/matrix.hpp"
#include "gcllrr/text_io.hpp"

namespace gcllrr {

/// Gram matrix K = H H^T of row-wise embeddings.
inline Matrix gram(const Matrix& h) {
  if (!h.allFinite()) throw contract_error("gram: embeddings must be finite");
  return h * h.transpose();
}

namespace detail {

inline void check_symmetric(const Matrix& k, const char* who) {
  if (k.rows() != k.cols()) throw contract_error(std::string(who) + ": matrix must be square");
  const double scale = 1.0 + k.cwiseAbs().maxCoeff();
  const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-10 * scale)
    throw contract_error(std::string(who) + ": matrix is not symmetric");
}

/// Eigenvalues of a symmetric matrix, descending.
inline Vector sym_eigenvalues_desc(const Matrix& s) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw numeric_error("eigenvalue computation failed to converge");
  return es.eigenvalues().reverse();
}

}  // namespace detail

/// Eigensystem of a symmetric matrix: descending eigenvalues and orthonormal
/// eigenvectors (one per column), with the sign convention that the first
/// nonzero component of each eigenvector is positive.
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix eigenvectors;
};

inline SpectralDecomposition sym_eig(const Matrix& k) {
  detail::check_symmetric(k, "sym_eig");
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (k + k.transpose()));
  if (es.info() != Eigen::Success)
    throw numeric_error("sym_eig: eigendecomposition failed to converge");
  SpectralDecomposition dec;
  dec.eigenvalues = es.eigenvalues().reverse();
  dec.eigenvectors = es.eigenvectors().rowwise().reverse();
  for (Index c = 0; c < dec.eigenvectors.cols(); ++c) {
    for (Index r = 0; r < dec.eigenvectors.rows(); ++r) {
      const double v = dec.eigenvectors(r, c);
      if (std::abs(v) > 1e-12) {
        if (v < 0.0) dec.eigenvectors.col(c) = -dec.eigenvectors.col(c);
        break;
      }
    }
  }
  return dec;
}

/// Gram spectrum of H, descending, padded with zeros to length N. Computed
/// through the smaller of H H^T and H^T H, which share the nonzero spectrum.
inline Vector gram_spectrum(const Matrix& h) {
  if (!h.allFinite()) throw contract_error("gram_spectrum: embeddings must be finite");
  const Index n = h.rows();
  const Index d = h.cols();
  const Matrix small = d <= n ? Matrix(h.transpose() * h) : Matrix(h * h.transpose());
  Vector vals = detail::sym_eigenvalues_desc(small);
  vals = vals.cwiseMax(0.0);
  Vector padded = Vector::Zero(n);
  padded.head(std::min<Index>(vals.size(), n)) = vals.head(std::min<Index>(vals.size(), n));
  return padded;
}

/// Truncated nuclear norm: the eigenvalue tail sum beyond rank r0.
inline double tnn_from_eigenvalues(const Vector& descending, Index r0) {
  if (r0 < 0 || r0 > descending.size())
    throw parameter_error("tnn: rank must lie in [0, N]");
  double tail = 0.0;
  for (Index i = descending.size() - 1; i >= r0; --i) tail += descending(i);
  return tail;
}

inline double tnn_gram(const Matrix& k, Index r0) {
  detail::check_symmetric(k, "tnn_gram");
  if (r0 < 0 || r0 > k.rows()) throw parameter_error("tnn: rank must lie in [0, N]");
  return tnn_from_eigenvalues(detail::sym_eigenvalues_desc(0.5 * (k + k.transpose())), r0);
}

/// TNN of gram(H) evaluated through the d x d co-gram when d < N. Tail sums
/// beyond any r0 agree between H H^T and H^T H, so this is exact.
inline double tnn_features(const Matrix& h, Index r0) {
  if (r0 < 0 || r0 > h.rows()) throw parameter_error("tnn: rank must lie in [0, N]");
  return tnn_from_eigenvalues(gram_spectrum(h), r0);
}

/// Gradient of the TNN tail sum with respect to H. Exact for simple spectra;
/// a subgradient flagged `degenerate` when the eigengap at r0 collapses.
struct TnnGradient {
  Matrix grad;
  bool degenerate;
};

inline TnnGradient tnn_gradient(const Matrix& h, Index r0) {
  const Index n = h.rows();
  const Index d = h.cols();
  if (r0 < 0 || r0 > n) throw parameter_error("tnn_gradient: rank must lie in [0, N]");
  if (!h.allFinite()) throw contract_error("tnn_gradient: embeddings must be finite");
  if (r0 == 0) return TnnGradient{2.0 * h, false};

  const Vector spectrum = gram_spectrum(h);
  bool degenerate = false;
  if (r0 < n) {
    const double gap = spectrum(r0 - 1) - spectrum(r0);
    degenerate = gap < 1e-8 * (1.0 + spectrum(0));
  }

  Matrix grad;
  if (d <= n) {
    // Top-r0 eigenvectors of H H^T correspond to eigenvectors V of H^T H via
    // U = H V / sqrt(lambda); the projector identity U U^T H = H V V^T makes
    // the gradient computable on the d x d side.
    Eigen::SelfAdjointEigenSolver<Matrix> es(h.transpose() * h);
    if (es.info() != Eigen::Success) throw numeric_error("tnn_gradient: eigensolver failed");
    const Index k = std::min<Index>(r0, d);
    const Matrix v_top = es.eigenvectors().rowwise().reverse().leftCols(k);
    grad = 2.0 * (h - h * (v_top * v_top.transpose()));
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h * h.transpose());
    if (es.info() != Eigen::Success) throw numeric_error("tnn_gradient: eigensolver failed");
    const Matrix u_top = es.eigenvectors().rowwise().reverse().leftCols(r0);
    grad = 2.0 * (h - u_top * (u_top.transpose() * h));
  }
  return TnnGradient{std::move(grad), degenerate};
}

/// min over r0 of r0 (1/u + 1/m) + sqrt(tail(r0)) (1/sqrt(u) + 1/sqrt(m)),
/// scanned over r0 = 0..N; smallest minimizer wins ties.
struct KernelComplexity {
  double value;
  Index argmin_rank;
};

inline KernelComplexity kernel_complexity(const Vector& descending, Index labeled,
                                          Index unlabeled) {
  const Index n = descending.size();
  if (n < 1) throw parameter_error("kernel_complexity: empty spectrum");
  if (labeled < 1 || unlabeled < 1)
    throw parameter_error("kernel_complexity: set sizes must be positive");
  const double scale = 1.0 + std::abs(descending(0));
  for (Index i = 0; i < n; ++i) {
    if (descending(i) < -1e-8 * scale)
      throw parameter_error("kernel_complexity: eigenvalues must be nonnegative");
    if (i > 0 && descending(i) > descending(i - 1) + 1e-9 * scale)
      throw parameter_error("kernel_complexity: eigenvalues must be descending");
  }

  const double m = static_cast<double>(labeled);
  const double u = static_cast<double>(unlabeled);
  const double rank_weight = 1.0 / u + 1.0 / m;
  const double tail_weight = 1.0 / std::sqrt(u) + 1.0 / std::sqrt(m);

  std::vector<double> suffix(static_cast<std::size_t>(n) + 1, 0.0);
  for (Index i = n - 1; i >= 0; --i) {
    suffix[static_cast<std::size_t>(i)] =
        suffix[static_cast<std::size_t>(i) + 1] + std::max(descending(i), 0.0);
  }

  KernelComplexity best{std::numeric_limits<double>::infinity(), 0};
  for (Index r0 = 0; r0 <= n; ++r0) {
    const double value = static_cast<double>(r0) * rank_weight +
                         std::sqrt(suffix[static_cast<std::size_t>(r0)]) * tail_weight;
    if (value < best.value) best = KernelComplexity{value, r0};
  }
  return best;
}

/// Linear attention B = K / lambda_1 and attended features F = B H.
/// gram(F) has eigenvalues lambda_i^3 / lambda_1^2 with unchanged
/// eigenvectors, so F never increases the kernel complexity.
struct AttentionTransform {
  Matrix attention;  // B, N x N, largest eigenvalue 1
  Matrix features;   // F = B H, N x d
};

inline AttentionTransform lr_attention(const Matrix& h) {
  const Vector spectrum = gram_spectrum(h);
  const double top = spectrum(0);
  if (!(top > 0.0)) throw degenerate_input_error("lr_attention: zero embedding matrix");
  Matrix b = (h * h.transpose()) / top;
  Matrix f = b * h;
  return AttentionTransform{std::move(b), std::move(f)};
}

/// Per-eigenvector projection scores of a label matrix, class-averaged and
/// column-normalized, plus the running concentration (prefix sums). When a
/// noise matrix is supplied its concentration curve is computed the same way.
struct ProjectionReport {
  Vector projection;                     // p_r, sums to 1
  Vector concentration;                  // nondecreasing, ends at 1
  std::optional<Vector> noise_concentration;
};

namespace detail {

inline Vector projection_scores(const SpectralDecomposition& dec, const Matrix& columns,
                                const char* what) {
  const Index n = dec.eigenvectors.rows();
  const Index c = columns.cols();
  if (columns.rows() != n)
    throw contract_error("eigen_projection: matrix rows must match decomposition size");
  Vector col_norm2(c);
  for (Index j = 0; j < c; ++j) {
    col_norm2(j) = columns.col(j).squaredNorm();
    if (col_norm2(j) == 0.0)
      throw parameter_error(std::string("eigen_projection: zero ") + what + " column");
  }
  const Matrix proj = dec.eigenvectors.transpose() * columns;  // N x C
  Vector p = Vector::Zero(n);
  for (Index r = 0; r < n; ++r) {
    double acc = 0.0;
    for (Index j = 0; j < c; ++j) acc += proj(r, j) * proj(r, j) / col_norm2(j);
    p(r) = acc / static_cast<double>(c);
  }
  return p;
}

inline Vector prefix_sums(const Vector& v) {
  Vector out(v.size());
  double acc = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    acc += v(i);
    out(i) = acc;
  }
  return out;
}

}  // namespace detail

inline ProjectionReport eigen_projection(const SpectralDecomposition& dec, const Matrix& labels,
                                         const Matrix* noise = nullptr) {
  ProjectionReport report;
  report.projection = detail::projection_scores(dec, labels, "label");
  report.concentration = detail::prefix_sums(report.projection);
  if (noise != nullptr) {
    report.noise_concentration =
        detail::prefix_sums(detail::projection_scores(dec, *noise, "noise"));
  }
  return report;
}

inline void write_projection_csv(const ProjectionReport& report, std::ostream& out) {
  out << "rank,p,signal_concentration,noise_concentration\n";
  for (Index r = 0; r < report.projection.size(); ++r) {
    out << (r + 1) << ',' << format_double(report.projection(r)) << ','
        << format_double(report.concentration(r)) << ',';
    if (report.noise_concentration) out << format_double((*report.noise_concentration)(r));
    out << '\n';
  }
}

}  // namespace gcllrr
