// Copyright 2026 The dyncomm Authors. All rights reserved.
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
#include "dyncomm/graph/graph_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dyncomm {

using ordered_json = nlohmann::ordered_json;

std::string graph_to_json(const Geo2DGraph& g, const IntMatrix* labels) {
  ordered_json j;
  j["L"] = g.L;
  j["D"] = g.D;
  ordered_json pos = ordered_json::array();
  for (const auto& p : g.positions) pos.push_back({p[0], p[1]});
  j["positions"] = pos;
  ordered_json edges = ordered_json::array();
  for (const auto& e : edge_list(g)) edges.push_back({e.u, e.v, e.delay});
  j["edges"] = edges;
  if (labels) {
    ordered_json rows = ordered_json::array();
    for (int i = 0; i < labels->rows(); ++i) {
      ordered_json row = ordered_json::array();
      for (int k = 0; k < labels->cols(); ++k) row.push_back((*labels)(i, k));
      rows.push_back(row);
    }
    j["labels"] = rows;
  }
  return j.dump();
}

Geo2DGraph graph_from_json(const std::string& text, IntMatrix* labels) {
  const auto j = nlohmann::json::parse(text);
  const int L = j.at("L").get<int>();
  std::vector<std::array<double, 2>> pos;
  for (const auto& p : j.at("positions")) pos.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
  }
  Geo2DGraph g = graph_from_edges(L, edges, pos);
  g.D = j.at("D").get<int>();
  g.validate();
  if (labels && j.contains("labels")) {
    const auto& rows = j["labels"];
    labels->resize(L, L);
    for (int i = 0; i < L; ++i) {
      for (int k = 0; k < L; ++k) (*labels)(i, k) = rows.at(i).at(k).get<int>();
    }
  }
  return g;
}

void save_graph(const std::filesystem::path& path, const Geo2DGraph& g, const IntMatrix* labels) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << graph_to_json(g, labels) << '\n';
}

Geo2DGraph load_graph(const std::filesystem::path& path, IntMatrix* labels) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return graph_from_json(ss.str(), labels);
}

void save_graph_dir(const std::filesystem::path& dir, const std::vector<Geo2DGraph>& graphs,
                    bool with_labels) {
  std::filesystem::create_directories(dir);
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "graph_%06zu.json", i);
    if (with_labels) {
      const IntMatrix lab = apsp(graphs[i], Metric::kDelay);
      save_graph(dir / name, graphs[i], &lab);
    } else {
      save_graph(dir / name, graphs[i]);
    }
  }
}

std::vector<Geo2DGraph> load_graph_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("graph directory not found: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("graph_", 0) == 0 && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<Geo2DGraph> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(load_graph(f));
  return out;
}

}  // namespace dyncomm
