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
#ifndef DYNCOMM_GRAPH_GRAPH_IO_HPP_
#define DYNCOMM_GRAPH_GRAPH_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dyncomm/graph/graph.hpp"
#include "dyncomm/graph/stats.hpp"

namespace dyncomm {

// JSON text with fixed key order: L, D, positions, edges [[u, v, delay]],
// and optionally labels (APSP delay rows).
std::string graph_to_json(const Geo2DGraph& g, const IntMatrix* labels = nullptr);
Geo2DGraph graph_from_json(const std::string& text, IntMatrix* labels = nullptr);

void save_graph(const std::filesystem::path& path, const Geo2DGraph& g,
                const IntMatrix* labels = nullptr);
Geo2DGraph load_graph(const std::filesystem::path& path, IntMatrix* labels = nullptr);

// One file per graph named graph_NNNNNN.json, loaded in name order.
void save_graph_dir(const std::filesystem::path& dir, const std::vector<Geo2DGraph>& graphs,
                    bool with_labels = false);
std::vector<Geo2DGraph> load_graph_dir(const std::filesystem::path& dir);

}  // namespace dyncomm

#endif  // DYNCOMM_GRAPH_GRAPH_IO_HPP_
