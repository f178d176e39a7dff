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
#ifndef DYNCOMM_GRAPH_GRAPH_HPP_
#define DYNCOMM_GRAPH_GRAPH_HPP_

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dyncomm/rng.hpp"

namespace dyncomm {

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Undirected fixed-degree graph with nodes in the unit square.
// Neighbor slots of each node are sorted by neighbor id; slot s of node v
// is the directed edge v * D + s.
struct Geo2DGraph {
  int L = 0;
  int D = 0;
  std::vector<std::array<double, 2>> positions;
  std::vector<std::vector<int>> neighbors;  // [v][slot], ascending ids
  std::vector<std::vector<int>> delays;     // [v][slot], >= 1

  int neighbor(int v, int slot) const { return neighbors[v][slot]; }
  int delay(int v, int slot) const { return delays[v][slot]; }
  // Slot of u in v's neighbor list, or -1.
  int slot_of(int v, int u) const;
  bool adjacent(int v, int u) const { return slot_of(v, u) >= 0; }
  int edge_delay(int v, int u) const;  // throws if not adjacent
  int num_edges() const;
  bool connected() const;
  // Every invariant: degrees, symmetry, ordering, delays, connectivity.
  void validate() const;
};

struct GraphGenConfig {
  double delay_scale = 6.75;
  int max_attempts = 10000;
};

// Places L nodes uniformly at random and attaches them by nearest-neighbor
// order until every node has degree D. Resamples until the result is
// connected and regular.
Geo2DGraph generate_graph(int L, int D, Rng& rng, const GraphGenConfig& cfg = {});

// Builds a graph from an explicit edge list (tests and file I/O).
struct Edge {
  int u;
  int v;
  int delay;
};
Geo2DGraph graph_from_edges(int L, const std::vector<Edge>& edges,
                            std::vector<std::array<double, 2>> positions = {});
std::vector<Edge> edge_list(const Geo2DGraph& g);

}  // namespace dyncomm

#endif  // DYNCOMM_GRAPH_GRAPH_HPP_
