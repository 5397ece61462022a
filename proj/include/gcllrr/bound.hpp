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

#include <json.hpp>

#include "gcllrr/classifier.hpp"
#include "gcllrr/graph.hpp"
#include "gcllrr/noise.hpp"
#include "gcllrr/spectral.hpp"

namespace gcllrr {

/// Diagnostics of the transductive test-loss bound
///   (2 c0 / m)(L1 + L2) + c0 KC + c0 x / u
/// for one embedding/label/split configuration. The constant c0 has no
/// computable formula and is a report input; tau0^2 = max_i K_ii is surfaced
/// so callers can scale it. The realized test MSE of the matching
/// MSE-gradient-descent run is included so bound >= realized can be checked.
struct BoundReport {
  double l1 = 0.0;
  double l2 = 0.0;
  double kc = 0.0;
  Index kc_argmin_r0 = 0;
  double tau0_sq = 0.0;
  double c0 = 1.0;
  double x = 1.0;
  Index labeled_count = 0;
  Index unlabeled_count = 0;
  Index steps = 0;
  double eta = 0.0;
  double combined = 0.0;
  double realized_test_mse = 0.0;
  double labeled_fraction = 0.0;
};

namespace detail {

struct LTermBasis {
  Vector eigenvalues;
  Matrix spectral_rows;  // V^T M for the relevant label matrix
};

inline LTermBasis l_term_basis(const Matrix& k_ll, const Matrix& labeled_rows, double eta,
                               Index steps, const char* who) {
  check_symmetric(k_ll, who);
  if (k_ll.rows() != labeled_rows.rows())
    throw contract_error(std::string(who) + ": label rows must match K_LL");
  if (steps < 0) throw parameter_error(std::string(who) + ": steps must be nonnegative");
  const SpectralDecomposition dec = sym_eig(k_ll);
  check_eta(eta, dec.eigenvalues(0), who);
  return LTermBasis{dec.eigenvalues, dec.eigenvectors.transpose() * labeled_rows};
}

}  // namespace detail

/// L1 = || (I - eta K_LL)^t [Y~]_L ||_F^2.
inline double l1_term(const Matrix& k_ll, const Matrix& clean_labeled, double eta, Index steps) {
  const auto basis = detail::l_term_basis(k_ll, clean_labeled, eta, steps, "l1_term");
  double acc = 0.0;
  for (Index i = 0; i < basis.eigenvalues.size(); ++i) {
    const double f = std::pow(1.0 - eta * basis.eigenvalues(i), static_cast<double>(steps));
    acc += f * f * basis.spectral_rows.row(i).squaredNorm();
  }
  return acc;
}

/// L2 = || eta K_LL sum_{t'=0}^{t-1} (I - eta K_LL)^{t'} [N]_L ||_F^2.
/// Per eigenvalue the factor telescopes to 1 - (1 - eta lambda)^t, which is
/// exactly 0 at lambda = 0 (the eta * t * lambda -> 0 limit).
inline double l2_term(const Matrix& k_ll, const Matrix& noise_labeled, double eta, Index steps) {
  const auto basis = detail::l_term_basis(k_ll, noise_labeled, eta, steps, "l2_term");
  double acc = 0.0;
  for (Index i = 0; i < basis.eigenvalues.size(); ++i) {
    const double f =
        1.0 - std::pow(1.0 - eta * basis.eigenvalues(i), static_cast<double>(steps));
    acc += f * f * basis.spectral_rows.row(i).squaredNorm();
  }
  return acc;
}

inline BoundReport evaluate_bound(const Matrix& feats, const Matrix& clean,
                                  const Matrix& observed, const SplitSpec& split, double eta,
                                  Index steps, double c0, double x) {
  if (feats.rows() != clean.rows() || clean.rows() != observed.rows() ||
      clean.cols() != observed.cols())
    throw contract_error("evaluate_bound: shape mismatch");
  validate_split(split, feats.rows());
  if (!(x > 0.0)) throw parameter_error("evaluate_bound: x must be positive");
  if (!(c0 > 0.0)) throw parameter_error("evaluate_bound: c0 must be positive");

  const Index n = feats.rows();
  const Index m = static_cast<Index>(split.labeled.size());
  const Index u = static_cast<Index>(split.unlabeled.size());

  const Matrix feats_l = select_rows(feats, split.labeled);
  const Matrix k_ll = feats_l * feats_l.transpose();
  const Matrix clean_l = select_rows(clean, split.labeled);
  const Matrix noise = observed - clean;
  const Matrix noise_l = select_rows(noise, split.labeled);

  BoundReport r;
  r.l1 = l1_term(k_ll, clean_l, eta, steps);
  r.l2 = l2_term(k_ll, noise_l, eta, steps);

  const KernelComplexity kc = kernel_complexity(gram_spectrum(feats), m, u);
  r.kc = kc.value;
  r.kc_argmin_r0 = kc.argmin_rank;

  r.tau0_sq = feats.rowwise().squaredNorm().maxCoeff();
  r.c0 = c0;
  r.x = x;
  r.labeled_count = m;
  r.unlabeled_count = u;
  r.steps = steps;
  r.eta = eta;
  r.combined = (2.0 * c0 / static_cast<double>(m)) * (r.l1 + r.l2) + c0 * r.kc +
               c0 * x / static_cast<double>(u);
  r.labeled_fraction = static_cast<double>(m) / static_cast<double>(n);

  const NoisyLabels labels{observed, noise};
  const ResidualTrajectory traj = mse_gd_trajectory(feats, labels, split, eta, steps);
  r.realized_test_mse =
      traj.unlabeled.back().squaredNorm() / static_cast<double>(u);
  return r;
}

inline nlohmann::ordered_json to_json(const BoundReport& r) {
  nlohmann::ordered_json j;
  j["l1"] = r.l1;
  j["l2"] = r.l2;
  j["kc"] = r.kc;
  j["kc_argmin_r0"] = r.kc_argmin_r0;
  j["tau0_sq"] = r.tau0_sq;
  j["c0"] = r.c0;
  j["x"] = r.x;
  j["labeled_count"] = r.labeled_count;
  j["unlabeled_count"] = r.unlabeled_count;
  j["steps"] = r.steps;
  j["eta"] = r.eta;
  j["combined"] = r.combined;
  j["realized_test_mse"] = r.realized_test_mse;
  j["labeled_fraction"] = r.labeled_fraction;
  return j;
}

}  // namespace gcllrr
