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
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gcllrr/graph.hpp"
#include "gcllrr/text_io.hpp"

namespace gcllrr {

// On-disk bundle layout (UTF-8, LF):
//   meta.json      {"num_nodes":N,"num_features":D,"num_classes":C}
//   edges.csv      header "src,dst", one undirected edge per line, src < dst
//   features.csv   N lines of D comma-separated decimals, 17 significant digits
//   labels.csv     header "node,label"
//   splits.json    optional, {"labeled":[...],"unlabeled":[...]}

namespace detail {

inline std::vector<std::string> read_lines(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw parse_error(file.filename().string() + ": file not found");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    lines.emplace_back(strip_cr(line));
  }
  return lines;
}

inline std::ofstream open_for_write(const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw io_error("cannot write " + file.string());
  return out;
}

}  // namespace detail

inline GraphBundle load_bundle(const std::filesystem::path& dir) {
  GraphBundle b;

  {
    std::ifstream in(dir / "meta.json");
    if (!in) throw parse_error("meta.json: file not found");
    nlohmann::json meta;
    try {
      in >> meta;
    } catch (const nlohmann::json::exception& e) {
      throw parse_error(std::string("meta.json: ") + e.what());
    }
    for (const char* key : {"num_nodes", "num_features", "num_classes"}) {
      if (!meta.contains(key) || !meta[key].is_number_integer())
        throw parse_error(std::string("meta.json: missing integer field '") + key + "'");
    }
    b.num_nodes = meta["num_nodes"].get<Index>();
    b.num_features = meta["num_features"].get<Index>();
    b.num_classes = meta["num_classes"].get<Index>();
  }

  {
    const auto lines = detail::read_lines(dir / "edges.csv");
    if (lines.empty() || lines[0] != "src,dst")
      throw parse_error("edges.csv line 1: expected header 'src,dst'");
    std::set<Edge> seen;
    for (std::size_t k = 1; k < lines.size(); ++k) {
      if (lines[k].empty()) continue;
      const std::string ctx = "edges.csv line " + std::to_string(k + 1);
      const auto fields = split_fields(lines[k]);
      if (fields.size() != 2) throw parse_error(ctx + ": expected two fields");
      const Index src = parse_int(fields[0], ctx);
      const Index dst = parse_int(fields[1], ctx);
      if (src < 0 || dst >= b.num_nodes) throw parse_error(ctx + ": node index out of range");
      if (src >= dst) throw parse_error(ctx + ": edges must satisfy src < dst");
      if (!seen.insert({src, dst}).second) throw parse_error(ctx + ": duplicate edge");
    }
    b.edges.assign(seen.begin(), seen.end());
  }

  {
    const auto lines = detail::read_lines(dir / "features.csv");
    std::vector<std::string_view> rows;
    for (const auto& l : lines) {
      if (!l.empty()) rows.emplace_back(l);
    }
    if (static_cast<Index>(rows.size()) != b.num_nodes)
      throw parse_error("features.csv: expected " + std::to_string(b.num_nodes) + " rows, found " +
                        std::to_string(rows.size()));
    b.features = Matrix(b.num_nodes, b.num_features);
    for (Index i = 0; i < b.num_nodes; ++i) {
      const std::string ctx = "features.csv line " + std::to_string(i + 1);
      const auto fields = split_fields(rows[static_cast<std::size_t>(i)]);
      if (static_cast<Index>(fields.size()) != b.num_features)
        throw parse_error(ctx + ": expected " + std::to_string(b.num_features) + " fields");
      for (Index j = 0; j < b.num_features; ++j) {
        b.features(i, j) = parse_double(fields[static_cast<std::size_t>(j)], ctx);
      }
    }
  }

  {
    const auto lines = detail::read_lines(dir / "labels.csv");
    if (lines.empty() || lines[0] != "node,label")
      throw parse_error("labels.csv line 1: expected header 'node,label'");
    std::vector<Index> labels(static_cast<std::size_t>(b.num_nodes), -1);
    for (std::size_t k = 1; k < lines.size(); ++k) {
      if (lines[k].empty()) continue;
      const std::string ctx = "labels.csv line " + std::to_string(k + 1);
      const auto fields = split_fields(lines[k]);
      if (fields.size() != 2) throw parse_error(ctx + ": expected two fields");
      const Index node = parse_int(fields[0], ctx);
      const Index label = parse_int(fields[1], ctx);
      if (node < 0 || node >= b.num_nodes) throw parse_error(ctx + ": node index out of range");
      if (label < 0 || label >= b.num_classes)
        throw parse_error(ctx + ": class index out of range");
      if (labels[static_cast<std::size_t>(node)] != -1)
        throw parse_error(ctx + ": duplicate label for node " + std::to_string(node));
      labels[static_cast<std::size_t>(node)] = label;
    }
    for (Index i = 0; i < b.num_nodes; ++i) {
      if (labels[static_cast<std::size_t>(i)] == -1)
        throw parse_error("labels.csv: missing label for node " + std::to_string(i));
    }
    b.clean_labels = one_hot_labels(labels, b.num_classes);
  }

  try {
    validate_bundle(b);
  } catch (const parameter_error& e) {
    throw parse_error(std::string("bundle validation failed: ") + e.what());
  }
  return b;
}

inline void save_bundle(const GraphBundle& b, const std::filesystem::path& dir) {
  validate_bundle(b);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw io_error("cannot create directory " + dir.string());

  {
    nlohmann::ordered_json meta;
    meta["num_nodes"] = b.num_nodes;
    meta["num_features"] = b.num_features;
    meta["num_classes"] = b.num_classes;
    auto out = detail::open_for_write(dir / "meta.json");
    out << meta.dump() << '\n';
  }
  {
    auto out = detail::open_for_write(dir / "edges.csv");
    out << "src,dst\n";
    for (const Edge& e : b.edges) out << e.first << ',' << e.second << '\n';
  }
  {
    auto out = detail::open_for_write(dir / "features.csv");
    for (Index i = 0; i < b.num_nodes; ++i) {
      for (Index j = 0; j < b.num_features; ++j) {
        if (j > 0) out << ',';
        out << format_double(b.features(i, j));
      }
      out << '\n';
    }
  }
  {
    auto out = detail::open_for_write(dir / "labels.csv");
    out << "node,label\n";
    for (Index i = 0; i < b.num_nodes; ++i) out << i << ',' << b.label_of(i) << '\n';
  }
}

inline std::optional<SplitSpec> load_splits(const std::filesystem::path& dir, Index num_nodes) {
  const auto file = dir / "splits.json";
  if (!std::filesystem::exists(file)) return std::nullopt;
  std::ifstream in(file);
  if (!in) throw parse_error("splits.json: cannot open");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("splits.json: ") + e.what());
  }
  if (!j.contains("labeled") || !j.contains("unlabeled"))
    throw parse_error("splits.json: expected 'labeled' and 'unlabeled' arrays");
  SplitSpec s;
  s.labeled = j["labeled"].get<std::vector<Index>>();
  s.unlabeled = j["unlabeled"].get<std::vector<Index>>();
  std::sort(s.labeled.begin(), s.labeled.end());
  std::sort(s.unlabeled.begin(), s.unlabeled.end());
  try {
    validate_split(s, num_nodes);
  } catch (const parameter_error& e) {
    throw parse_error(std::string("splits.json: ") + e.what());
  }
  return s;
}

inline void save_splits(const SplitSpec& s, const std::filesystem::path& dir) {
  nlohmann::ordered_json j;
  j["labeled"] = s.labeled;
  j["unlabeled"] = s.unlabeled;
  auto out = detail::open_for_write(dir / "splits.json");
  out << j.dump() << '\n';
}

inline Matrix load_matrix_csv(const std::filesystem::path& file) {
  const auto lines = detail::read_lines(file);
  std::vector<std::string_view> rows;
  for (const auto& l : lines) {
    if (!l.empty()) rows.emplace_back(l);
  }
  if (rows.empty()) throw parse_error(file.filename().string() + ": empty matrix");
  const auto first = split_fields(rows[0]);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(first.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string ctx = file.filename().string() + " line " + std::to_string(i + 1);
    const auto fields = split_fields(rows[i]);
    if (fields.size() != first.size()) throw parse_error(ctx + ": ragged row");
    for (std::size_t j = 0; j < fields.size(); ++j) {
      m(static_cast<Index>(i), static_cast<Index>(j)) = parse_double(fields[j], ctx);
    }
  }
  return m;
}

inline void save_matrix_csv(const Matrix& m, const std::filesystem::path& file) {
  auto out = detail::open_for_write(file);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

/// Reads a labels.csv file against known bundle dimensions and returns the
/// one-hot matrix.
inline Matrix load_labels_csv(const std::filesystem::path& file, Index num_nodes,
                              Index num_classes) {
  const auto lines = detail::read_lines(file);
  if (lines.empty() || lines[0] != "node,label")
    throw parse_error(file.filename().string() + " line 1: expected header 'node,label'");
  std::vector<Index> labels(static_cast<std::size_t>(num_nodes), -1);
  for (std::size_t k = 1; k < lines.size(); ++k) {
    if (lines[k].empty()) continue;
    const std::string ctx = file.filename().string() + " line " + std::to_string(k + 1);
    const auto fields = split_fields(lines[k]);
    if (fields.size() != 2) throw parse_error(ctx + ": expected two fields");
    const Index node = parse_int(fields[0], ctx);
    const Index label = parse_int(fields[1], ctx);
    if (node < 0 || node >= num_nodes) throw parse_error(ctx + ": node index out of range");
    if (label < 0 || label >= num_classes) throw parse_error(ctx + ": class index out of range");
    if (labels[static_cast<std::size_t>(node)] != -1)
      throw parse_error(ctx + ": duplicate label for node " + std::to_string(node));
    labels[static_cast<std::size_t>(node)] = label;
  }
  for (Index i = 0; i < num_nodes; ++i) {
    if (labels[static_cast<std::size_t>(i)] == -1)
      throw parse_error(file.filename().string() + ": missing label for node " + std::to_string(i));
  }
  return one_hot_labels(labels, num_classes);
}

}  // namespace gcllrr
