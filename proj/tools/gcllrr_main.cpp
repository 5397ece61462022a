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

// Command-line harness: dataset generation, corruption, encoder training,
// transductive classification, bound diagnostics, projection export,
// hyperparameter cross-validation, and full experiment sweeps.
//
// Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gcllrr/gcllrr.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json matrix_to_json(const gcllrr::Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (gcllrr::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (gcllrr::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

gcllrr::Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty() || !j[0].is_array())
    throw gcllrr::parse_error(what + ": expected an array of rows");
  gcllrr::Matrix m(static_cast<gcllrr::Index>(j.size()),
                   static_cast<gcllrr::Index>(j[0].size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j[i].size() != j[0].size()) throw gcllrr::parse_error(what + ": ragged rows");
    for (std::size_t c = 0; c < j[i].size(); ++c)
      m(static_cast<gcllrr::Index>(i), static_cast<gcllrr::Index>(c)) = j[i][c].get<double>();
  }
  return m;
}

void save_encoder_params(const gcllrr::EncoderParams& p, const fs::path& file) {
  ordered_json j;
  j["hidden_width"] = p.w0.cols();
  j["embed_width"] = p.w1.cols();
  j["w0"] = matrix_to_json(p.w0);
  j["w1"] = matrix_to_json(p.w1);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw gcllrr::io_error("cannot write " + file.string());
  out << j.dump() << '\n';
}

gcllrr::EncoderParams load_encoder_params(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw gcllrr::parse_error(file.string() + ": file not found");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw gcllrr::parse_error(file.string() + ": " + e.what());
  }
  gcllrr::EncoderParams p;
  p.w0 = matrix_from_json(j.at("w0"), "w0");
  p.w1 = matrix_from_json(j.at("w1"), "w1");
  return p;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gcllrr::parse_error(path + ": file not found");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw gcllrr::parse_error(path + ": " + e.what());
  }
  return j;
}

/// splits.json when the bundle ships one, otherwise a seeded uniform split.
gcllrr::SplitSpec resolve_split(const std::string& bundle_dir, gcllrr::Index num_nodes,
                                gcllrr::Index labeled_count, std::uint64_t seed) {
  if (auto stored = gcllrr::load_splits(bundle_dir, num_nodes)) return *stored;
  if (labeled_count <= 0)
    throw gcllrr::parameter_error(
        "bundle has no splits.json; pass --labeled-count to sample a split");
  return gcllrr::sample_split(num_nodes, labeled_count,
                              gcllrr::derive_seed(seed, gcllrr::seed_salt::kSplit));
}

std::vector<double> parse_grid(const std::string& csv, const std::vector<double>& fallback) {
  if (csv.empty()) return fallback;
  std::vector<double> grid;
  for (const auto field : gcllrr::split_fields(csv))
    grid.push_back(gcllrr::parse_double(field, "grid"));
  return grid;
}

struct CommonArgs {
  std::string bundle;
  std::string embeddings;
  std::string observed;
  std::string out;
  std::uint64_t seed = 0;
  gcllrr::Index labeled_count = 0;
};

struct LoadedData {
  gcllrr::GraphBundle bundle;
  gcllrr::Matrix embeddings;
  gcllrr::Matrix observed;  // equals clean labels when no --observed given
  gcllrr::SplitSpec split;
};

LoadedData load_embedding_task(const CommonArgs& a) {
  LoadedData d;
  d.bundle = gcllrr::load_bundle(a.bundle);
  d.embeddings = gcllrr::load_matrix_csv(a.embeddings);
  if (d.embeddings.rows() != d.bundle.num_nodes)
    throw gcllrr::parameter_error("embeddings row count does not match the bundle");
  d.observed = a.observed.empty()
                   ? d.bundle.clean_labels
                   : gcllrr::load_labels_csv(a.observed, d.bundle.num_nodes,
                                             d.bundle.num_classes);
  d.split = resolve_split(a.bundle, d.bundle.num_nodes, a.labeled_count, a.seed);
  return d;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gcllrr: low-rank regularized graph contrastive learning"};
  app.require_subcommand(1);

  // generate
  auto* cmd_generate = app.add_subcommand("generate", "Create a stochastic block model bundle");
  gcllrr::SbmParams sbm;
  std::string gen_out;
  std::uint64_t gen_seed = 0;
  gcllrr::Index gen_labeled = 0;
  cmd_generate->add_option("--blocks", sbm.blocks, "Number of blocks/classes");
  cmd_generate->add_option("--per-block", sbm.per_block, "Nodes per block");
  cmd_generate->add_option("--p-in", sbm.p_in, "Within-block edge probability");
  cmd_generate->add_option("--p-out", sbm.p_out, "Cross-block edge probability");
  cmd_generate->add_option("--feature-dim", sbm.feature_dim, "Feature dimensionality");
  cmd_generate->add_option("--feature-shift", sbm.feature_shift, "Class mean separation");
  cmd_generate->add_option("--labeled-count", gen_labeled,
                           "Also sample and store a labeled/unlabeled split of this size");
  cmd_generate->add_option("--seed", gen_seed, "Random seed");
  cmd_generate->add_option("--out", gen_out, "Output bundle directory")->required();

  // corrupt
  auto* cmd_corrupt = app.add_subcommand("corrupt", "Apply label/attribute noise to a bundle");
  std::string cor_bundle, cor_kind = "symmetric", cor_out;
  double cor_rate = 0.0, cor_attr = 0.0;
  std::uint64_t cor_seed = 0;
  cmd_corrupt->add_option("--bundle", cor_bundle, "Input bundle directory")->required();
  cmd_corrupt->add_option("--kind", cor_kind, "Noise kind: none|symmetric|asymmetric");
  cmd_corrupt->add_option("--rate", cor_rate, "Label flip rate in [0,1]");
  cmd_corrupt->add_option("--attribute-ratio", cor_attr, "Per-node feature shuffle ratio");
  cmd_corrupt->add_option("--seed", cor_seed, "Random seed");
  cmd_corrupt->add_option("--out", cor_out, "Output bundle directory")->required();

  // train
  auto* cmd_train = app.add_subcommand("train", "Train the contrastive encoder");
  std::string train_bundle, train_config, train_out;
  gcllrr::TrainConfig tc;
  cmd_train->add_option("--bundle", train_bundle, "Input bundle directory")->required();
  cmd_train->add_option("--config", train_config, "Encoder config JSON file");
  auto* o_epochs = cmd_train->add_option("--epochs", tc.epochs, "Training epochs");
  auto* o_step = cmd_train->add_option("--step-size", tc.step_size, "Gradient step size");
  auto* o_tnnw = cmd_train->add_option("--tnn-weight", tc.tnn_weight, "TNN loss weight");
  auto* o_gamma = cmd_train->add_option("--rank-ratio", tc.rank_ratio, "Target rank ratio");
  auto* o_hidden = cmd_train->add_option("--hidden-width", tc.hidden_width, "Hidden width");
  auto* o_embed = cmd_train->add_option("--embed-width", tc.embed_width, "Embedding width");
  auto* o_clusters = cmd_train->add_option("--num-clusters", tc.num_clusters,
                                           "Prototype clusters (0: one per class)");
  auto* o_tnode = cmd_train->add_option("--node-temperature", tc.node_temperature,
                                        "Node loss temperature");
  auto* o_tproto = cmd_train->add_option("--proto-temperature", tc.proto_temperature,
                                         "Prototype loss temperature");
  auto* o_edge = cmd_train->add_option("--edge-ratio", tc.edge_perturb_ratio,
                                       "Edge perturbation ratio");
  auto* o_mask = cmd_train->add_option("--mask-ratio", tc.feature_mask_ratio,
                                       "Feature mask ratio");
  auto* o_drop = cmd_train->add_option("--drop-ratio", tc.node_drop_ratio, "Node drop ratio");
  auto* o_seed = cmd_train->add_option("--seed", tc.seed, "Random seed");
  cmd_train->add_option("--out", train_out, "Output directory")->required();

  // embed
  auto* cmd_embed = app.add_subcommand("embed", "Compute embeddings with trained weights");
  std::string emb_bundle, emb_params, emb_out;
  cmd_embed->add_option("--bundle", emb_bundle, "Input bundle directory")->required();
  cmd_embed->add_option("--params", emb_params, "Encoder params JSON")->required();
  cmd_embed->add_option("--out", emb_out, "Output embeddings CSV")->required();

  // classify
  auto* cmd_classify = app.add_subcommand("classify", "Train the transductive classifier");
  CommonArgs cls;
  double cls_eta_scale = 0.9;
  gcllrr::Index cls_epochs = 500;
  cmd_classify->add_option("--bundle", cls.bundle, "Bundle with clean labels")->required();
  cmd_classify->add_option("--embeddings", cls.embeddings, "Embeddings CSV")->required();
  cmd_classify->add_option("--observed", cls.observed, "Observed (noisy) labels CSV");
  cmd_classify->add_option("--eta-scale", cls_eta_scale, "eta = scale / lambda_1");
  cmd_classify->add_option("--epochs", cls_epochs, "Gradient descent epochs");
  cmd_classify->add_option("--labeled-count", cls.labeled_count,
                           "Labeled set size when the bundle has no splits.json");
  cmd_classify->add_option("--seed", cls.seed, "Random seed");
  cmd_classify->add_option("--out", cls.out, "Output predictions CSV")->required();

  // bound
  auto* cmd_bound = app.add_subcommand("bound", "Evaluate the test-loss bound diagnostics");
  CommonArgs bnd;
  double bnd_eta_scale = 0.9, bnd_c0 = 1.0, bnd_x = 1.0;
  gcllrr::Index bnd_steps = 100;
  cmd_bound->add_option("--bundle", bnd.bundle, "Bundle with clean labels")->required();
  cmd_bound->add_option("--embeddings", bnd.embeddings, "Embeddings CSV")->required();
  cmd_bound->add_option("--observed", bnd.observed, "Observed (noisy) labels CSV");
  cmd_bound->add_option("--eta-scale", bnd_eta_scale, "eta = scale / lambda_1");
  cmd_bound->add_option("--steps", bnd_steps, "Gradient descent steps t");
  cmd_bound->add_option("--c0", bnd_c0, "Bound constant c0");
  cmd_bound->add_option("--x", bnd_x, "Confidence parameter x");
  cmd_bound->add_option("--labeled-count", bnd.labeled_count,
                        "Labeled set size when the bundle has no splits.json");
  cmd_bound->add_option("--seed", bnd.seed, "Random seed");
  cmd_bound->add_option("--out", bnd.out, "Output JSON file")->required();

  // project
  auto* cmd_project = app.add_subcommand("project", "Export eigen-projection curves");
  CommonArgs prj;
  cmd_project->add_option("--bundle", prj.bundle, "Bundle with clean labels")->required();
  cmd_project->add_option("--embeddings", prj.embeddings, "Embeddings CSV")->required();
  cmd_project->add_option("--observed", prj.observed,
                          "Observed labels CSV; enables the noise curve");
  cmd_project->add_option("--out", prj.out, "Output CSV file")->required();

  // cv
  auto* cmd_cv = app.add_subcommand("cv", "Cross-validate rank ratio and TNN weight");
  std::string cv_config, cv_gamma, cv_tau, cv_out;
  gcllrr::Index cv_folds = 5;
  cmd_cv->add_option("--config", cv_config, "Experiment config JSON")->required();
  cmd_cv->add_option("--gamma-grid", cv_gamma, "Comma-separated rank ratios");
  cmd_cv->add_option("--tau-grid", cv_tau, "Comma-separated TNN weights");
  cmd_cv->add_option("--folds", cv_folds, "Number of folds");
  cmd_cv->add_option("--out", cv_out, "Output JSON file")->required();

  // experiment
  auto* cmd_experiment = app.add_subcommand("experiment", "Run a seed x variant sweep");
  std::string exp_config, exp_out;
  cmd_experiment->add_option("--config", exp_config, "Experiment config JSON")->required();
  cmd_experiment->add_option("--out", exp_out, "Output directory (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(cmd_generate)) {
      const gcllrr::GraphBundle b =
          gcllrr::generate_sbm(sbm.blocks, sbm.per_block, sbm.p_in, sbm.p_out,
                               sbm.feature_dim, sbm.feature_shift, gen_seed);
      gcllrr::save_bundle(b, gen_out);
      if (gen_labeled > 0) {
        gcllrr::save_splits(
            gcllrr::sample_split(b.num_nodes, gen_labeled,
                                 gcllrr::derive_seed(gen_seed, gcllrr::seed_salt::kSplit)),
            gen_out);
      }
    } else if (app.got_subcommand(cmd_corrupt)) {
      gcllrr::GraphBundle b = gcllrr::load_bundle(cor_bundle);
      const auto splits = gcllrr::load_splits(cor_bundle, b.num_nodes);
      std::vector<gcllrr::Index> targets;
      if (splits) {
        targets = splits->labeled;
      } else {
        targets.resize(static_cast<std::size_t>(b.num_nodes));
        for (gcllrr::Index i = 0; i < b.num_nodes; ++i)
          targets[static_cast<std::size_t>(i)] = i;
      }
      if (cor_kind != "none" && cor_rate > 0.0) {
        const auto t = gcllrr::build_transition_matrix(gcllrr::parse_noise_kind(cor_kind),
                                                       cor_rate, b.num_classes);
        const auto noisy = gcllrr::inject_label_noise(
            b.clean_labels, t, gcllrr::derive_seed(cor_seed, gcllrr::seed_salt::kLabelNoise));
        for (gcllrr::Index i : targets) b.clean_labels.row(i) = noisy.observed.row(i);
      }
      if (cor_attr > 0.0) {
        const auto shuffled = gcllrr::inject_attribute_noise(
            b.features, cor_attr,
            gcllrr::derive_seed(cor_seed, gcllrr::seed_salt::kAttributeNoise));
        for (gcllrr::Index i : targets) b.features.row(i) = shuffled.row(i);
      }
      gcllrr::save_bundle(b, cor_out);
      if (splits) gcllrr::save_splits(*splits, cor_out);
    } else if (app.got_subcommand(cmd_train)) {
      const gcllrr::GraphBundle b = gcllrr::load_bundle(train_bundle);
      gcllrr::TrainConfig config;
      if (!train_config.empty()) config = gcllrr::parse_encoder_config(read_json_file(train_config));
      if (o_epochs->count()) config.epochs = tc.epochs;
      if (o_step->count()) config.step_size = tc.step_size;
      if (o_tnnw->count()) config.tnn_weight = tc.tnn_weight;
      if (o_gamma->count()) config.rank_ratio = tc.rank_ratio;
      if (o_hidden->count()) config.hidden_width = tc.hidden_width;
      if (o_embed->count()) config.embed_width = tc.embed_width;
      if (o_clusters->count()) config.num_clusters = tc.num_clusters;
      if (o_tnode->count()) config.node_temperature = tc.node_temperature;
      if (o_tproto->count()) config.proto_temperature = tc.proto_temperature;
      if (o_edge->count()) config.edge_perturb_ratio = tc.edge_perturb_ratio;
      if (o_mask->count()) config.feature_mask_ratio = tc.feature_mask_ratio;
      if (o_drop->count()) config.node_drop_ratio = tc.node_drop_ratio;
      if (o_seed->count()) config.seed = tc.seed;

      const gcllrr::TrainResult result = gcllrr::train_encoder(b, config);
      std::error_code ec;
      fs::create_directories(train_out, ec);
      if (ec) throw gcllrr::io_error("cannot create directory " + train_out);
      save_encoder_params(result.params, fs::path(train_out) / "params.json");
      std::ofstream trace(fs::path(train_out) / "loss_trace.csv", std::ios::binary);
      if (!trace) throw gcllrr::io_error("cannot write loss_trace.csv");
      gcllrr::write_loss_trace_csv(result.trace, trace);
    } else if (app.got_subcommand(cmd_embed)) {
      const gcllrr::GraphBundle b = gcllrr::load_bundle(emb_bundle);
      const gcllrr::EncoderParams p = load_encoder_params(emb_params);
      const gcllrr::Matrix adjacency = gcllrr::normalize_adjacency(b).matrix;
      const gcllrr::Matrix h = gcllrr::gcn_forward(p, b.features, adjacency);
      gcllrr::save_matrix_csv(h, emb_out);
    } else if (app.got_subcommand(cmd_classify)) {
      const LoadedData d = load_embedding_task(cls);
      const double lambda1 = gcllrr::top_gram_eigenvalue(d.embeddings);
      if (!(lambda1 > 0.0))
        throw gcllrr::degenerate_input_error("classify: embeddings are all zero");
      const auto fit = gcllrr::train_transductive(d.embeddings, d.observed, d.split,
                                                  cls_eta_scale / lambda1, cls_epochs);
      std::vector<gcllrr::Index> all_nodes(static_cast<std::size_t>(d.bundle.num_nodes));
      for (gcllrr::Index i = 0; i < d.bundle.num_nodes; ++i)
        all_nodes[static_cast<std::size_t>(i)] = i;
      const auto predicted = gcllrr::predict_labels(fit.probabilities, all_nodes);
      std::vector<bool> is_test(static_cast<std::size_t>(d.bundle.num_nodes), false);
      for (gcllrr::Index i : d.split.unlabeled) is_test[static_cast<std::size_t>(i)] = true;
      std::ofstream out(cls.out, std::ios::binary);
      if (!out) throw gcllrr::io_error("cannot write " + cls.out);
      out << "node,predicted,observed,clean,is_test\n";
      const auto observed_cls = gcllrr::argmax_rows(d.observed);
      for (gcllrr::Index i = 0; i < d.bundle.num_nodes; ++i) {
        out << i << ',' << predicted[static_cast<std::size_t>(i)] << ','
            << observed_cls[static_cast<std::size_t>(i)] << ',' << d.bundle.label_of(i) << ','
            << (is_test[static_cast<std::size_t>(i)] ? 1 : 0) << '\n';
      }
    } else if (app.got_subcommand(cmd_bound)) {
      const LoadedData d = load_embedding_task(bnd);
      const double lambda1 = gcllrr::top_gram_eigenvalue(d.embeddings);
      if (!(lambda1 > 0.0))
        throw gcllrr::degenerate_input_error("bound: embeddings are all zero");
      const gcllrr::BoundReport report =
          gcllrr::evaluate_bound(d.embeddings, d.bundle.clean_labels, d.observed, d.split,
                                 bnd_eta_scale / lambda1, bnd_steps, bnd_c0, bnd_x);
      std::ofstream out(bnd.out, std::ios::binary);
      if (!out) throw gcllrr::io_error("cannot write " + bnd.out);
      out << gcllrr::to_json(report).dump(2) << '\n';
    } else if (app.got_subcommand(cmd_project)) {
      const gcllrr::GraphBundle b = gcllrr::load_bundle(prj.bundle);
      const gcllrr::Matrix h = gcllrr::load_matrix_csv(prj.embeddings);
      if (h.rows() != b.num_nodes)
        throw gcllrr::parameter_error("embeddings row count does not match the bundle");
      if (prj.observed.empty()) {
        gcllrr::emit_projection_csv(h, b.clean_labels, nullptr, prj.out);
      } else {
        const gcllrr::Matrix observed =
            gcllrr::load_labels_csv(prj.observed, b.num_nodes, b.num_classes);
        const gcllrr::Matrix noise = observed - b.clean_labels;
        gcllrr::emit_projection_csv(h, b.clean_labels, &noise, prj.out);
      }
    } else if (app.got_subcommand(cmd_cv)) {
      const gcllrr::ExperimentConfig config =
          gcllrr::parse_experiment_config(read_json_file(cv_config));
      const auto gamma_grid = parse_grid(cv_gamma, gcllrr::kDefaultGammaGrid);
      const auto tau_grid = parse_grid(cv_tau, gcllrr::kDefaultTauGrid);
      const auto result = gcllrr::cross_validate(config, gamma_grid, tau_grid, cv_folds);
      ordered_json j;
      j["best_gamma"] = result.best_gamma;
      j["best_tau_tnn"] = result.best_tau;
      j["best_loss"] = result.best_loss;
      ordered_json cells = ordered_json::array();
      for (const auto& cell : result.table) {
        if (cell.error.empty()) {
          cells.push_back(ordered_json{{"gamma", cell.gamma},
                                       {"tau_tnn", cell.tau},
                                       {"fold", cell.fold},
                                       {"loss", cell.loss}});
        } else {
          cells.push_back(ordered_json{
              {"gamma", cell.gamma}, {"tau_tnn", cell.tau}, {"error", cell.error}});
        }
      }
      j["cells"] = std::move(cells);
      std::ofstream out(cv_out, std::ios::binary);
      if (!out) throw gcllrr::io_error("cannot write " + cv_out);
      out << j.dump(2) << '\n';
    } else if (app.got_subcommand(cmd_experiment)) {
      gcllrr::ExperimentConfig config =
          gcllrr::parse_experiment_config(read_json_file(exp_config));
      if (!exp_out.empty()) config.out_dir = exp_out;
      if (config.out_dir.empty())
        throw gcllrr::parameter_error("experiment: pass --out or set \"out\" in the config");
      gcllrr::run_experiment(config);
    }
  } catch (const gcllrr::parameter_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gcllrr::parse_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const gcllrr::io_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
