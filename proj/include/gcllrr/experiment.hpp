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
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gcllrr/bound.hpp"
#include "gcllrr/bundle_io.hpp"
#include "gcllrr/classifier.hpp"
#include "gcllrr/encoder.hpp"
#include "gcllrr/noise.hpp"
#include "gcllrr/sbm.hpp"
#include "gcllrr/spectral.hpp"

namespace gcllrr {

// Seed stream salts; every randomized stage of a run draws from its own
// derived stream so stages stay independent and reproducible.
namespace seed_salt {
inline constexpr std::uint64_t kSbm = 0x5B31;
inline constexpr std::uint64_t kSplit = 0x5B32;
inline constexpr std::uint64_t kLabelNoise = 0x5B33;
inline constexpr std::uint64_t kAttributeNoise = 0x5B34;
inline constexpr std::uint64_t kEncoder = 0x5B35;
inline constexpr std::uint64_t kValidation = 0x5B36;
inline constexpr std::uint64_t kCvFolds = 0x5B37;
}  // namespace seed_salt

inline const std::vector<std::string> kKnownVariants = {
    "gcn-only", "gcl-lrr", "gcl-lr-attention", "gcl-no-tnn"};

/// Hyperparameter search space used by default for cross-validation.
inline const std::vector<double> kDefaultGammaGrid = {0.1, 0.2, 0.3, 0.4, 0.5,
                                                      0.6, 0.7, 0.8, 0.9};
inline const std::vector<double> kDefaultTauGrid = {0.05, 0.10, 0.15, 0.20, 0.25,
                                                    0.30, 0.35, 0.40, 0.45, 0.50};

struct SbmParams {
  Index blocks = 3;
  Index per_block = 100;
  double p_in = 0.1;
  double p_out = 0.01;
  Index feature_dim = 32;
  double feature_shift = 1.0;
};

struct ExperimentNoise {
  std::string kind = "none";  // none | symmetric | asymmetric
  double rate = 0.0;
  double attribute_ratio = 0.0;
};

struct SplitParams {
  Index labeled_count = 0;        // takes precedence when positive
  double labeled_fraction = 0.1;  // otherwise round(fraction * N)
};

struct ClassifierParams {
  double eta_scale = 0.9;  // eta = eta_scale / lambda_1
  Index epochs = 500;
};

struct BoundParams {
  double c0 = 1.0;
  double x = 1.0;
  Index steps = 100;
};

struct ExperimentConfig {
  std::string bundle_path;  // one of bundle_path / sbm must be set
  std::optional<SbmParams> sbm;
  ExperimentNoise noise;
  SplitParams split;
  TrainConfig encoder;
  ClassifierParams classifier;
  BoundParams bound;
  std::vector<std::string> variants = {"gcl-lrr"};
  std::vector<std::uint64_t> seeds = {1};
  std::string out_dir;
};

// ---------------------------------------------------------------------------
// Config (de)serialization

inline nlohmann::ordered_json encoder_config_json(const TrainConfig& c) {
  nlohmann::ordered_json j;
  j["hidden_width"] = c.hidden_width;
  j["embed_width"] = c.embed_width;
  j["tnn_weight"] = c.tnn_weight;
  j["rank_ratio"] = c.rank_ratio;
  j["node_temperature"] = c.node_temperature;
  j["proto_temperature"] = c.proto_temperature;
  j["num_clusters"] = c.num_clusters;
  j["epochs"] = c.epochs;
  j["step_size"] = c.step_size;
  j["edge_perturb_ratio"] = c.edge_perturb_ratio;
  j["feature_mask_ratio"] = c.feature_mask_ratio;
  j["node_drop_ratio"] = c.node_drop_ratio;
  j["seed"] = c.seed;
  return j;
}

inline TrainConfig parse_encoder_config(const nlohmann::json& j) {
  TrainConfig c;
  c.hidden_width = j.value("hidden_width", c.hidden_width);
  c.embed_width = j.value("embed_width", c.embed_width);
  c.tnn_weight = j.value("tnn_weight", c.tnn_weight);
  c.rank_ratio = j.value("rank_ratio", c.rank_ratio);
  c.node_temperature = j.value("node_temperature", c.node_temperature);
  c.proto_temperature = j.value("proto_temperature", c.proto_temperature);
  c.num_clusters = j.value("num_clusters", c.num_clusters);
  c.epochs = j.value("epochs", c.epochs);
  c.step_size = j.value("step_size", c.step_size);
  c.edge_perturb_ratio = j.value("edge_perturb_ratio", c.edge_perturb_ratio);
  c.feature_mask_ratio = j.value("feature_mask_ratio", c.feature_mask_ratio);
  c.node_drop_ratio = j.value("node_drop_ratio", c.node_drop_ratio);
  c.seed = j.value("seed", c.seed);
  return c;
}

inline nlohmann::ordered_json canonical_config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  if (c.sbm) {
    nlohmann::ordered_json s;
    s["blocks"] = c.sbm->blocks;
    s["per_block"] = c.sbm->per_block;
    s["p_in"] = c.sbm->p_in;
    s["p_out"] = c.sbm->p_out;
    s["feature_dim"] = c.sbm->feature_dim;
    s["feature_shift"] = c.sbm->feature_shift;
    j["dataset"] = nlohmann::ordered_json{{"sbm", s}};
  } else {
    j["dataset"] = nlohmann::ordered_json{{"bundle", c.bundle_path}};
  }
  j["noise"] = nlohmann::ordered_json{{"kind", c.noise.kind},
                                      {"rate", c.noise.rate},
                                      {"attribute_ratio", c.noise.attribute_ratio}};
  j["split"] = nlohmann::ordered_json{{"labeled_count", c.split.labeled_count},
                                      {"labeled_fraction", c.split.labeled_fraction}};
  j["encoder"] = encoder_config_json(c.encoder);
  j["classifier"] = nlohmann::ordered_json{{"eta_scale", c.classifier.eta_scale},
                                           {"epochs", c.classifier.epochs}};
  j["bound"] = nlohmann::ordered_json{
      {"c0", c.bound.c0}, {"x", c.bound.x}, {"steps", c.bound.steps}};
  j["variants"] = c.variants;
  j["seeds"] = c.seeds;
  return j;
}

inline void validate_experiment_config(const ExperimentConfig& c) {
  if (c.bundle_path.empty() && !c.sbm)
    throw parameter_error("experiment config: need a bundle path or SBM parameters");
  if (c.variants.empty()) throw parameter_error("experiment config: need at least one variant");
  if (c.seeds.empty()) throw parameter_error("experiment config: need at least one seed");
  for (const std::string& v : c.variants) {
    if (std::find(kKnownVariants.begin(), kKnownVariants.end(), v) == kKnownVariants.end())
      throw parameter_error("experiment config: unknown variant '" + v + "'");
  }
  if (c.noise.kind != "none" && c.noise.kind != "symmetric" && c.noise.kind != "asymmetric")
    throw parameter_error("experiment config: unknown noise kind '" + c.noise.kind + "'");
  if (!(c.noise.rate >= 0.0 && c.noise.rate <= 1.0))
    throw parameter_error("experiment config: noise rate must lie in [0, 1]");
  if (!(c.noise.attribute_ratio >= 0.0 && c.noise.attribute_ratio <= 1.0))
    throw parameter_error("experiment config: attribute ratio must lie in [0, 1]");
  if (!(c.classifier.eta_scale > 0.0 && c.classifier.eta_scale < 1.0))
    throw parameter_error("experiment config: eta_scale must lie in (0, 1)");
  if (c.classifier.epochs < 0)
    throw parameter_error("experiment config: classifier epochs must be nonnegative");
  if (c.split.labeled_count == 0 &&
      !(c.split.labeled_fraction > 0.0 && c.split.labeled_fraction < 1.0))
    throw parameter_error("experiment config: labeled fraction must lie in (0, 1)");
}

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  ExperimentConfig c;
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    if (d.contains("bundle")) c.bundle_path = d["bundle"].get<std::string>();
    if (d.contains("sbm")) {
      const auto& s = d["sbm"];
      SbmParams p;
      p.blocks = s.value("blocks", p.blocks);
      p.per_block = s.value("per_block", p.per_block);
      p.p_in = s.value("p_in", p.p_in);
      p.p_out = s.value("p_out", p.p_out);
      p.feature_dim = s.value("feature_dim", p.feature_dim);
      p.feature_shift = s.value("feature_shift", p.feature_shift);
      c.sbm = p;
    }
  }
  if (j.contains("noise")) {
    const auto& nj = j["noise"];
    c.noise.kind = nj.value("kind", c.noise.kind);
    c.noise.rate = nj.value("rate", c.noise.rate);
    c.noise.attribute_ratio = nj.value("attribute_ratio", c.noise.attribute_ratio);
  }
  if (j.contains("split")) {
    const auto& sj = j["split"];
    c.split.labeled_count = sj.value("labeled_count", c.split.labeled_count);
    c.split.labeled_fraction = sj.value("labeled_fraction", c.split.labeled_fraction);
  }
  if (j.contains("encoder")) c.encoder = parse_encoder_config(j["encoder"]);
  if (j.contains("classifier")) {
    const auto& cj = j["classifier"];
    c.classifier.eta_scale = cj.value("eta_scale", c.classifier.eta_scale);
    c.classifier.epochs = cj.value("epochs", c.classifier.epochs);
  }
  if (j.contains("bound")) {
    const auto& bj = j["bound"];
    c.bound.c0 = bj.value("c0", c.bound.c0);
    c.bound.x = bj.value("x", c.bound.x);
    c.bound.steps = bj.value("steps", c.bound.steps);
  }
  if (j.contains("variants")) c.variants = j["variants"].get<std::vector<std::string>>();
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("out")) c.out_dir = j["out"].get<std::string>();
  validate_experiment_config(c);
  return c;
}

/// FNV-1a over the canonical config serialization; stable across platforms.
inline std::string config_hash(const ExperimentConfig& c) {
  const std::string text = canonical_config_json(c).dump();
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char ch : text) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// Run orchestration

namespace detail {

/// Everything one seed's data preparation produces. Label and attribute
/// corruption touch labeled nodes only; test rows stay clean by construction.
struct PreparedData {
  GraphBundle bundle;      // features already carry attribute noise
  Matrix clean_labels;
  Matrix observed_labels;
  SplitSpec split;
  std::vector<Index> validation;  // subset of split.labeled
};

inline PreparedData prepare_run_data(const ExperimentConfig& c, std::uint64_t seed) {
  PreparedData d;
  if (c.sbm) {
    d.bundle = generate_sbm(c.sbm->blocks, c.sbm->per_block, c.sbm->p_in, c.sbm->p_out,
                            c.sbm->feature_dim, c.sbm->feature_shift,
                            derive_seed(seed, seed_salt::kSbm));
  } else {
    d.bundle = load_bundle(c.bundle_path);
  }
  const Index n = d.bundle.num_nodes;
  d.clean_labels = d.bundle.clean_labels;

  std::optional<SplitSpec> stored;
  if (!c.bundle_path.empty()) stored = load_splits(c.bundle_path, n);
  if (stored) {
    d.split = *stored;
  } else {
    Index m = c.split.labeled_count;
    if (m <= 0) {
      m = static_cast<Index>(std::llround(c.split.labeled_fraction * static_cast<double>(n)));
      m = std::max<Index>(1, std::min<Index>(m, n - 1));
    }
    d.split = sample_split(n, m, derive_seed(seed, seed_salt::kSplit));
  }

  // 20% of the labeled set, reserved as the early-stopping monitor; identical
  // across variants of the same seed.
  {
    std::vector<Index> shuffled = d.split.labeled;
    Rng rng(derive_seed(seed, seed_salt::kValidation));
    rng.shuffle(shuffled);
    const Index v = static_cast<Index>(
        std::ceil(0.2 * static_cast<double>(d.split.labeled.size())));
    d.validation.assign(shuffled.begin(), shuffled.begin() + v);
    std::sort(d.validation.begin(), d.validation.end());
  }

  d.observed_labels = d.clean_labels;
  if (c.noise.kind != "none" && c.noise.rate > 0.0) {
    const TransitionMatrix t = build_transition_matrix(parse_noise_kind(c.noise.kind),
                                                       c.noise.rate, d.bundle.num_classes);
    const NoisyLabels full =
        inject_label_noise(d.clean_labels, t, derive_seed(seed, seed_salt::kLabelNoise));
    for (Index i : d.split.labeled) d.observed_labels.row(i) = full.observed.row(i);
  }

  if (c.noise.attribute_ratio > 0.0) {
    const Matrix shuffled = inject_attribute_noise(
        d.bundle.features, c.noise.attribute_ratio, derive_seed(seed, seed_salt::kAttributeNoise));
    for (Index i : d.split.labeled) d.bundle.features.row(i) = shuffled.row(i);
  }
  return d;
}

struct VariantOutputs {
  Matrix classifier_features;  // H, or the attention features F
  double accuracy = 0.0;
  BoundReport bound;
};

inline VariantOutputs run_variant(const ExperimentConfig& c, const PreparedData& d,
                                  std::uint64_t seed, const std::string& variant,
                                  std::map<std::pair<Index, double>, EncoderParams>& cache) {
  TrainConfig enc = c.encoder;
  enc.seed = derive_seed(seed, seed_salt::kEncoder);
  if (variant == "gcn-only") enc.epochs = 0;
  if (variant == "gcl-no-tnn") enc.tnn_weight = 0.0;

  const std::pair<Index, double> key{enc.epochs, enc.tnn_weight};
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, train_encoder(d.bundle, enc).params).first;
  }
  const EncoderParams& params = it->second;

  const Matrix adjacency = normalize_adjacency(d.bundle).matrix;
  const Matrix embeddings = gcn_forward(params, d.bundle.features, adjacency);

  VariantOutputs out;
  out.classifier_features =
      variant == "gcl-lr-attention" ? lr_attention(embeddings).features : embeddings;

  const double lambda1 = top_gram_eigenvalue(out.classifier_features);
  if (!(lambda1 > 0.0))
    throw degenerate_input_error("run_variant: embeddings collapsed to zero");
  const double eta = c.classifier.eta_scale / lambda1;

  // The classifier trains on the labeled nodes outside the validation
  // subset; validation drives early stopping.
  SplitSpec cls_split;
  {
    std::vector<bool> is_val(static_cast<std::size_t>(d.bundle.num_nodes), false);
    for (Index i : d.validation) is_val[static_cast<std::size_t>(i)] = true;
    for (Index i : d.split.labeled) {
      if (!is_val[static_cast<std::size_t>(i)]) cls_split.labeled.push_back(i);
    }
    if (cls_split.labeled.empty()) cls_split.labeled = d.split.labeled;
    std::vector<bool> is_train(static_cast<std::size_t>(d.bundle.num_nodes), false);
    for (Index i : cls_split.labeled) is_train[static_cast<std::size_t>(i)] = true;
    for (Index i = 0; i < d.bundle.num_nodes; ++i) {
      if (!is_train[static_cast<std::size_t>(i)]) cls_split.unlabeled.push_back(i);
    }
  }
  const std::vector<Index>* monitor = d.validation.empty() ? nullptr : &d.validation;
  const TransductiveFit fit = train_transductive(out.classifier_features, d.observed_labels,
                                                 cls_split, eta, c.classifier.epochs, monitor);

  const std::vector<Index> predicted = predict_labels(fit.probabilities, d.split.unlabeled);
  Index correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    Index truth = 0;
    d.clean_labels.row(d.split.unlabeled[i]).maxCoeff(&truth);
    if (predicted[i] == truth) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());

  out.bound = evaluate_bound(out.classifier_features, d.clean_labels, d.observed_labels,
                             d.split, eta, c.bound.steps, c.bound.c0, c.bound.x);
  return out;
}

}  // namespace detail

/// Seed-averaged per-variant table of accuracy and bound components, one
/// CSV row per variant.
inline void write_summary_csv(const std::vector<std::string>& variants,
                              const std::vector<nlohmann::ordered_json>& records,
                              std::ostream& out) {
  out << "variant,seeds,errors,accuracy,l1,l2,kc,upper_bound,realized_test_mse\n";
  for (const std::string& variant : variants) {
    Index seeds = 0, errors = 0;
    double acc = 0, l1 = 0, l2 = 0, kc = 0, combined = 0, realized = 0;
    for (const auto& r : records) {
      if (r["variant"] != variant) continue;
      if (r.contains("error")) {
        ++errors;
        continue;
      }
      ++seeds;
      acc += r["accuracy"].get<double>();
      l1 += r["bound"]["l1"].get<double>();
      l2 += r["bound"]["l2"].get<double>();
      kc += r["bound"]["kc"].get<double>();
      combined += r["bound"]["combined"].get<double>();
      realized += r["bound"]["realized_test_mse"].get<double>();
    }
    out << variant << ',' << seeds << ',' << errors;
    if (seeds > 0) {
      const double n = static_cast<double>(seeds);
      out << ',' << format_double(acc / n) << ',' << format_double(l1 / n) << ','
          << format_double(l2 / n) << ',' << format_double(kc / n) << ','
          << format_double(combined / n) << ',' << format_double(realized / n);
    } else {
      out << ",,,,,,";
    }
    out << '\n';
  }
}

/// Runs every seed x variant cell and returns one record per cell. A failing
/// cell contributes a record with an "error" field and the sweep continues.
/// When the config names an output directory, the records are also appended
/// to <out>/records.jsonl in a fixed order (plus a per-variant summary.csv),
/// so identical configs produce bit-identical files.
inline std::vector<nlohmann::ordered_json> run_experiment(const ExperimentConfig& c) {
  validate_experiment_config(c);
  const std::string hash = config_hash(c);

  std::vector<nlohmann::ordered_json> records;
  for (const std::uint64_t seed : c.seeds) {
    std::optional<detail::PreparedData> data;
    std::string prepare_error;
    try {
      data = detail::prepare_run_data(c, seed);
    } catch (const std::exception& e) {
      prepare_error = e.what();
    }
    std::map<std::pair<Index, double>, EncoderParams> cache;
    for (const std::string& variant : c.variants) {
      nlohmann::ordered_json rec;
      rec["config_hash"] = hash;
      rec["seed"] = seed;
      rec["variant"] = variant;
      try {
        if (!data) throw numeric_error("data preparation failed: " + prepare_error);
        const detail::VariantOutputs out = detail::run_variant(c, *data, seed, variant, cache);
        rec["num_nodes"] = data->bundle.num_nodes;
        rec["labeled"] = static_cast<Index>(data->split.labeled.size());
        rec["unlabeled"] = static_cast<Index>(data->split.unlabeled.size());
        rec["accuracy"] = out.accuracy;
        rec["bound"] = to_json(out.bound);
      } catch (const std::exception& e) {
        rec["error"] = e.what();
      }
      records.push_back(std::move(rec));
    }
  }

  if (!c.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) throw io_error("cannot create directory " + c.out_dir);
    auto out = detail::open_for_write(std::filesystem::path(c.out_dir) / "records.jsonl");
    for (const auto& rec : records) out << rec.dump() << '\n';
    auto summary = detail::open_for_write(std::filesystem::path(c.out_dir) / "summary.csv");
    write_summary_csv(c.variants, records, summary);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Cross-validation of (rank ratio, TNN weight)

struct CrossValidationCell {
  double gamma;
  double tau;
  Index fold;         // -1 for a cell that failed before fold evaluation
  double loss;        // +inf for failed cells
  std::string error;  // empty on success
};

struct CrossValidationResult {
  double best_gamma;
  double best_tau;
  double best_loss;
  std::vector<CrossValidationCell> table;
};

/// K-fold search over the (gamma, tau) grid on the labeled set: the encoder
/// is retrained per grid cell, the classifier per fold, and the mean
/// held-out KL loss decides. Ties break toward smaller gamma, then tau.
/// A grid cell whose encoder training fails (representation collapse under a
/// heavy TNN weight, or a rank bound made invalid by the gamma) is recorded
/// with an error and skipped; the search needs at least one viable cell.
inline CrossValidationResult cross_validate(const ExperimentConfig& c,
                                            const std::vector<double>& gamma_grid,
                                            const std::vector<double>& tau_grid, Index folds) {
  validate_experiment_config(c);
  if (gamma_grid.empty() || tau_grid.empty())
    throw parameter_error("cross_validate: grids must be nonempty");
  if (folds < 2) throw parameter_error("cross_validate: need at least 2 folds");

  const std::uint64_t seed = c.seeds.front();
  const detail::PreparedData d = detail::prepare_run_data(c, seed);
  const Index m = static_cast<Index>(d.split.labeled.size());
  if (folds > m) throw parameter_error("cross_validate: fold count exceeds the labeled set");

  std::vector<Index> shuffled = d.split.labeled;
  {
    Rng rng(derive_seed(seed, seed_salt::kCvFolds));
    rng.shuffle(shuffled);
  }
  std::vector<std::vector<Index>> fold_sets(static_cast<std::size_t>(folds));
  for (std::size_t i = 0; i < shuffled.size(); ++i) {
    fold_sets[i % static_cast<std::size_t>(folds)].push_back(shuffled[i]);
  }

  const Matrix adjacency = normalize_adjacency(d.bundle).matrix;

  CrossValidationResult result;
  result.best_loss = std::numeric_limits<double>::infinity();
  result.best_gamma = gamma_grid.front();
  result.best_tau = tau_grid.front();

  for (const double gamma : gamma_grid) {
    for (const double tau : tau_grid) {
      TrainConfig enc = c.encoder;
      enc.rank_ratio = gamma;
      enc.tnn_weight = tau;
      enc.seed = derive_seed(seed, seed_salt::kEncoder);
      Matrix embeddings;
      double eta = 0.0;
      try {
        const TrainResult trained = train_encoder(d.bundle, enc);
        embeddings = gcn_forward(trained.params, d.bundle.features, adjacency);
        const double lambda1 = top_gram_eigenvalue(embeddings);
        if (!(lambda1 > 0.0))
          throw degenerate_input_error("cross_validate: embeddings collapsed to zero");
        eta = c.classifier.eta_scale / lambda1;
      } catch (const std::exception& e) {
        result.table.push_back(CrossValidationCell{
            gamma, tau, -1, std::numeric_limits<double>::infinity(), e.what()});
        continue;
      }

      double mean_loss = 0.0;
      for (Index f = 0; f < folds; ++f) {
        const std::vector<Index>& held_out = fold_sets[static_cast<std::size_t>(f)];
        SplitSpec fold_split;
        {
          std::vector<bool> in_fold(static_cast<std::size_t>(d.bundle.num_nodes), false);
          for (Index i : held_out) in_fold[static_cast<std::size_t>(i)] = true;
          for (Index i : d.split.labeled) {
            if (!in_fold[static_cast<std::size_t>(i)]) fold_split.labeled.push_back(i);
          }
          std::vector<bool> is_train(static_cast<std::size_t>(d.bundle.num_nodes), false);
          for (Index i : fold_split.labeled) is_train[static_cast<std::size_t>(i)] = true;
          for (Index i = 0; i < d.bundle.num_nodes; ++i) {
            if (!is_train[static_cast<std::size_t>(i)]) fold_split.unlabeled.push_back(i);
          }
        }
        const TransductiveFit fit = train_transductive(embeddings, d.observed_labels,
                                                       fold_split, eta, c.classifier.epochs);
        double fold_loss = 0.0;
        for (Index i : held_out) {
          Index cls = 0;
          d.observed_labels.row(i).maxCoeff(&cls);
          fold_loss -= std::log(std::max(fit.probabilities(i, cls), 1e-300));
        }
        fold_loss /= static_cast<double>(held_out.size());
        result.table.push_back(CrossValidationCell{gamma, tau, f, fold_loss, {}});
        mean_loss += fold_loss;
      }
      mean_loss /= static_cast<double>(folds);

      const bool better =
          mean_loss < result.best_loss ||
          (mean_loss == result.best_loss &&
           (gamma < result.best_gamma ||
            (gamma == result.best_gamma && tau < result.best_tau)));
      if (better) {
        result.best_loss = mean_loss;
        result.best_gamma = gamma;
        result.best_tau = tau;
      }
    }
  }
  if (!std::isfinite(result.best_loss))
    throw numeric_error("cross_validate: every grid cell failed");
  return result;
}

/// Writes the eigen-projection / concentration curves of the embedding gram
/// matrix against the clean labels (and optionally the label noise).
inline void emit_projection_csv(const Matrix& embeddings, const Matrix& clean_labels,
                                const Matrix* noise, const std::filesystem::path& path) {
  const SpectralDecomposition dec = sym_eig(gram(embeddings));
  const ProjectionReport report = eigen_projection(dec, clean_labels, noise);
  auto out = detail::open_for_write(path);
  write_projection_csv(report, out);
}

}  // namespace gcllrr
