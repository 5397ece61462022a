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
#include <utility>
#include <vector>

#include "gcllrr/graph.hpp"
#include "gcllrr/noise.hpp"
#include "gcllrr/spectral.hpp"

namespace gcllrr {

/// Two linear transductive classifiers live here on purpose. The softmax/KL
/// classifier is the one used for accuracy numbers; the MSE gradient-descent
/// variant is the one whose residual trajectory has a closed form, and the
/// two are never conflated.

struct ClassifierState {
  Matrix weights;  // d x C, starts at exactly zero
  double step_size;
  Index iterations;
};

/// Largest eigenvalue of gram(feats), computed on the smaller side.
inline double top_gram_eigenvalue(const Matrix& feats) {
  return gram_spectrum(feats)(0);
}

namespace detail {

inline void check_eta(double eta, double lambda1, const char* who) {
  if (!(eta > 0.0) || eta * lambda1 >= 1.0 + 1e-12)
    throw parameter_error(std::string(who) +
                          ": learning rate must lie in (0, 1/lambda_1)");
}

inline Matrix row_softmax(const Matrix& logits) {
  const Vector row_max = logits.rowwise().maxCoeff();
  Matrix e = (logits.colwise() - row_max).array().exp().matrix();
  const Vector denom = e.rowwise().sum();
  return denom.cwiseInverse().asDiagonal() * e;
}

}  // namespace detail

struct SoftmaxKlLoss {
  double value;
  Matrix grad;  // with respect to the weights
};

/// Mean KL divergence between one-hot labels and row softmax of feats * W,
/// with its exact gradient.
inline SoftmaxKlLoss softmax_kl_loss(const Matrix& feats, const Matrix& labels,
                                     const Matrix& weights) {
  if (feats.rows() != labels.rows() || feats.cols() != weights.rows() ||
      weights.cols() != labels.cols())
    throw contract_error("softmax_kl_loss: shape mismatch");
  const Index m = feats.rows();
  const Matrix logits = feats * weights;
  const Vector row_max = logits.rowwise().maxCoeff();
  const Matrix shifted = logits.colwise() - row_max;
  const Matrix e = shifted.array().exp().matrix();
  const Vector denom = e.rowwise().sum();

  double loss = 0.0;
  for (Index i = 0; i < m; ++i) {
    Index cls = 0;
    labels.row(i).maxCoeff(&cls);
    loss += std::log(denom(i)) - shifted(i, cls);
  }
  loss /= static_cast<double>(m);

  const Matrix probs = denom.cwiseInverse().asDiagonal() * e;
  Matrix grad = feats.transpose() * (probs - labels) / static_cast<double>(m);
  return SoftmaxKlLoss{loss, std::move(grad)};
}

struct TransductiveFit {
  ClassifierState state;
  Matrix probabilities;  // N x C, row-stochastic
};

/// Full-batch gradient descent from W = 0 on the labeled KL objective.
/// Stops early once the monitored loss has improved by less than 1e-7 for
/// 20 consecutive epochs; `monitor` defaults to the labeled set itself.
inline TransductiveFit train_transductive(const Matrix& feats, const Matrix& observed,
                                          const SplitSpec& split, double eta, Index epochs,
                                          const std::vector<Index>* monitor = nullptr) {
  if (feats.rows() != observed.rows())
    throw contract_error("train_transductive: feature/label row mismatch");
  validate_split(split, feats.rows());
  if (epochs < 0) throw parameter_error("train_transductive: epochs must be nonnegative");
  detail::check_eta(eta, top_gram_eigenvalue(feats), "train_transductive");

  const Matrix feats_l = select_rows(feats, split.labeled);
  const Matrix labels_l = select_rows(observed, split.labeled);
  const std::vector<Index>& monitored = monitor != nullptr ? *monitor : split.labeled;
  const Matrix feats_m = select_rows(feats, monitored);
  const Matrix labels_m = select_rows(observed, monitored);

  constexpr double kImproveTol = 1e-7;
  constexpr int kPatience = 20;

  ClassifierState state;
  state.weights = Matrix::Zero(feats.cols(), observed.cols());
  state.step_size = eta;
  state.iterations = 0;

  double prev = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (Index epoch = 1; epoch <= epochs; ++epoch) {
    const SoftmaxKlLoss step = softmax_kl_loss(feats_l, labels_l, state.weights);
    state.weights -= eta * step.grad;
    state.iterations = epoch;

    const double monitored_loss =
        softmax_kl_loss(feats_m, labels_m, state.weights).value;
    if (prev - monitored_loss < kImproveTol) {
      if (++stall >= kPatience) break;
    } else {
      stall = 0;
    }
    prev = monitored_loss;
  }

  Matrix probabilities = detail::row_softmax(feats * state.weights);
  return TransductiveFit{std::move(state), std::move(probabilities)};
}

/// Row-wise argmax over a subset, lowest class index on ties.
inline std::vector<Index> predict_labels(const Matrix& probabilities,
                                         const std::vector<Index>& subset) {
  for (Index i = 0; i < probabilities.rows(); ++i) {
    if (std::abs(probabilities.row(i).sum() - 1.0) > 1e-9)
      throw contract_error("predict_labels: rows must sum to 1");
  }
  std::vector<Index> out;
  out.reserve(subset.size());
  for (Index node : subset) {
    if (node < 0 || node >= probabilities.rows())
      throw contract_error("predict_labels: index out of range");
    Index best = 0;
    double best_v = probabilities(node, 0);
    for (Index c = 1; c < probabilities.cols(); ++c) {
      if (probabilities(node, c) > best_v) {
        best_v = probabilities(node, c);
        best = c;
      }
    }
    out.push_back(best);
  }
  return out;
}

/// Residuals of the linear MSE classifier against the clean labels, on the
/// labeled and unlabeled sets, recorded after every gradient step.
struct ResidualTrajectory {
  std::vector<Matrix> labeled;    // length steps + 1, entry t is [H W^t - Y~]_L
  std::vector<Matrix> unlabeled;  // same for the unlabeled rows
};

/// Iterates W^t = W^{t-1} - eta [H]_L^T [H W^{t-1} - Y]_L from W = 0, where Y
/// is the observed (possibly noisy) label matrix, and measures residuals
/// against the clean labels.
inline ResidualTrajectory mse_gd_trajectory(const Matrix& feats, const NoisyLabels& labels,
                                            const SplitSpec& split, double eta, Index steps) {
  if (feats.rows() != labels.observed.rows())
    throw contract_error("mse_gd_trajectory: feature/label row mismatch");
  if (labels.observed.rows() != labels.noise.rows() ||
      labels.observed.cols() != labels.noise.cols())
    throw contract_error("mse_gd_trajectory: observed/noise shape mismatch");
  validate_split(split, feats.rows());
  if (steps < 0) throw parameter_error("mse_gd_trajectory: steps must be nonnegative");
  detail::check_eta(eta, top_gram_eigenvalue(feats), "mse_gd_trajectory");

  const Matrix clean = labels.observed - labels.noise;
  const Matrix feats_l = select_rows(feats, split.labeled);
  const Matrix observed_l = select_rows(labels.observed, split.labeled);
  const Matrix clean_l = select_rows(clean, split.labeled);
  const Matrix clean_u = select_rows(clean, split.unlabeled);
  const Matrix feats_u = select_rows(feats, split.unlabeled);

  ResidualTrajectory traj;
  traj.labeled.reserve(static_cast<std::size_t>(steps) + 1);
  traj.unlabeled.reserve(static_cast<std::size_t>(steps) + 1);

  Matrix w = Matrix::Zero(feats.cols(), labels.observed.cols());
  traj.labeled.push_back(feats_l * w - clean_l);
  traj.unlabeled.push_back(feats_u * w - clean_u);
  for (Index t = 1; t <= steps; ++t) {
    w -= eta * (feats_l.transpose() * (feats_l * w - observed_l));
    traj.labeled.push_back(feats_l * w - clean_l);
    traj.unlabeled.push_back(feats_u * w - clean_u);
  }
  return traj;
}

/// Closed form of the labeled residual after t MSE gradient-descent steps:
///   -(I - eta K_LL)^t [Y~]_L
///   + eta K_LL sum_{t'=0}^{t-1} (I - eta K_LL)^{t'} [N]_L,
/// evaluated through the eigendecomposition of K_LL. The geometric factor is
/// 1 - (1 - eta lambda)^t per eigenvalue, which is exactly 0 at lambda = 0.
inline Matrix closed_form_residual(const Matrix& k_ll, const Matrix& clean_labeled,
                                   const Matrix& noise_labeled, double eta, Index steps) {
  detail::check_symmetric(k_ll, "closed_form_residual");
  if (k_ll.rows() != clean_labeled.rows() || clean_labeled.rows() != noise_labeled.rows() ||
      clean_labeled.cols() != noise_labeled.cols())
    throw contract_error("closed_form_residual: shape mismatch");
  if (steps < 0) throw parameter_error("closed_form_residual: steps must be nonnegative");

  const SpectralDecomposition dec = sym_eig(k_ll);
  detail::check_eta(eta, dec.eigenvalues(0), "closed_form_residual");

  const Matrix clean_spec = dec.eigenvectors.transpose() * clean_labeled;
  const Matrix noise_spec = dec.eigenvectors.transpose() * noise_labeled;
  const Index m = k_ll.rows();

  Matrix combined(m, clean_labeled.cols());
  for (Index i = 0; i < m; ++i) {
    const double contraction = std::pow(1.0 - eta * dec.eigenvalues(i),
                                        static_cast<double>(steps));
    combined.row(i) =
        -contraction * clean_spec.row(i) + (1.0 - contraction) * noise_spec.row(i);
  }
  return dec.eigenvectors * combined;
}

}  // namespace gcllrr
