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
#ifndef DYNCOMM_GRAPH_STATS_HPP_
#define DYNCOMM_GRAPH_STATS_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dyncomm/graph/graph.hpp"

namespace dyncomm {

enum class Metric { kHops, kDelay };

using IntMatrix = Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Exact all-pairs shortest paths (BFS for hops, Dijkstra for delay).
// Unreachable pairs hold -1.
IntMatrix apsp(const Geo2DGraph& g, Metric metric);

// Hop-count betweenness (Brandes), normalized by the number of unordered
// pairs not containing the node: (L-1)(L-2)/2.
std::vector<double> betweenness(const Geo2DGraph& g);

struct GraphStats {
  int diameter_hops = 0;
  int diameter_delay = 0;
  IntMatrix apsp_hops;
  IntMatrix apsp_delay;
  std::vector<double> betweenness;
};

GraphStats compute_stats(const Geo2DGraph& g);

struct Summary {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

Summary summarize(std::span<const double> xs);

// Per-metric summary across a batch. APSP rows pool all L*L entries of
// every graph (diagonal included); betweenness pools every node.
// Keys: order, degree, size, diameter_hops, diameter_delay, apsp_hops,
// apsp_delay, betweenness.
struct BatchStats {
  std::map<std::string, Summary> metrics;
  // Fraction of off-diagonal APSP(hops) entries strictly below 8.
  double frac_paths_under_8_hops = 0.0;
};

BatchStats graph_stats(std::span<const Geo2DGraph> graphs);

}  // namespace dyncomm

#endif  // DYNCOMM_GRAPH_STATS_HPP_
