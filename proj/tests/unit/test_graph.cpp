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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "dyncomm/graph/graph.hpp"
#include "dyncomm/graph/graph_io.hpp"
#include "dyncomm/graph/stats.hpp"
#include "dyncomm/rng.hpp"
#include "oracles.hpp"

namespace dyncomm {
namespace {

Geo2DGraph cycle(int L) {
  std::vector<Edge> e;
  for (int v = 0; v < L; ++v) e.push_back({v, (v + 1) % L, 1 + v % 3});
  return graph_from_edges(L, e);
}

TEST(Graph, GeneratedGraphsAreRegularConnectedAndSymmetric) {
  Rng rng = Rng::stream(11, "graphgen");
  for (int i = 0; i < 200; ++i) {
    const Geo2DGraph g = generate_graph(20, 3, rng);
    EXPECT_NO_THROW(g.validate());
    EXPECT_EQ(g.num_edges(), 30);
  }
}

TEST(Graph, DelaysFollowScaledDistance) {
  Rng rng(12);
  GraphGenConfig cfg;
  const Geo2DGraph g = generate_graph(12, 3, rng, cfg);
  for (int v = 0; v < g.L; ++v) {
    for (int s = 0; s < g.D; ++s) {
      const int u = g.neighbor(v, s);
      const double d = std::hypot(g.positions[v][0] - g.positions[u][0],
                                  g.positions[v][1] - g.positions[u][1]);
      EXPECT_EQ(g.delay(v, s), std::max(1L, std::lround(d * cfg.delay_scale)));
    }
  }
}

TEST(Graph, SameSeedSameGraph) {
  Rng a(5), b(5);
  const Geo2DGraph g1 = generate_graph(20, 3, a);
  const Geo2DGraph g2 = generate_graph(20, 3, b);
  EXPECT_EQ(g1.neighbors, g2.neighbors);
  EXPECT_EQ(g1.delays, g2.delays);
}

TEST(Graph, RejectsImpossibleShapes) {
  Rng rng(1);
  EXPECT_THROW(generate_graph(5, 3, rng), std::invalid_argument);
  EXPECT_THROW(generate_graph(3, 3, rng), std::invalid_argument);
}

TEST(Graph, ValidateCatchesBrokenGraphs) {
  Geo2DGraph g = cycle(5);
  EXPECT_NO_THROW(g.validate());
  g.delays[0][0] = 7;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  Geo2DGraph split = graph_from_edges(4, {{0, 1, 1}, {2, 3, 1}});
  EXPECT_THROW(split.validate(), std::invalid_argument);
}

TEST(Graph, SlotLookup) {
  const Geo2DGraph g = cycle(5);
  EXPECT_EQ(g.neighbors[0], (std::vector<int>{1, 4}));
  EXPECT_EQ(g.slot_of(0, 4), 1);
  EXPECT_EQ(g.slot_of(0, 2), -1);
  EXPECT_THROW(g.edge_delay(0, 2), std::out_of_range);
}

TEST(Stats, ApspMatchesFloydWarshall) {
  Rng rng(13);
  for (int i = 0; i < 30; ++i) {
    const Geo2DGraph g = generate_graph(20, 3, rng);
    EXPECT_EQ(apsp(g, Metric::kHops), testing::floyd_warshall(g, Metric::kHops));
    EXPECT_EQ(apsp(g, Metric::kDelay), testing::floyd_warshall(g, Metric::kDelay));
  }
}

TEST(Stats, BetweennessMatchesBruteForce) {
  Rng rng(14);
  for (int L : {4, 5, 6, 7, 8}) {
    for (int D : {2, 3}) {
      if ((L * D) % 2 != 0) continue;
      for (int i = 0; i < 10; ++i) {
        const Geo2DGraph g = generate_graph(L, D, rng);
        const auto fast = betweenness(g);
        const auto slow = testing::brute_force_betweenness(g);
        for (int v = 0; v < L; ++v) EXPECT_NEAR(fast[v], slow[v], 1e-9);
      }
    }
  }
}

TEST(Stats, CycleDiameter) {
  const GraphStats s = compute_stats(cycle(7));
  EXPECT_EQ(s.diameter_hops, 3);
  EXPECT_EQ(s.apsp_hops(0, 3), 3);
  EXPECT_EQ(s.apsp_hops(0, 4), 3);
}

TEST(Stats, SummarizeIsPopulation) {
  const std::vector<double> xs = {1.0, 3.0};
  const Summary s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.std, 1.0);
  EXPECT_DOUBLE_EQ(s.min, 1.0);
  EXPECT_DOUBLE_EQ(s.max, 3.0);
}

TEST(GraphIo, JsonRoundTripWithLabels) {
  Rng rng(15);
  const Geo2DGraph g = generate_graph(10, 3, rng);
  const IntMatrix labels = apsp(g, Metric::kDelay);
  IntMatrix back_labels;
  const Geo2DGraph back = graph_from_json(graph_to_json(g, &labels), &back_labels);
  EXPECT_EQ(back.neighbors, g.neighbors);
  EXPECT_EQ(back.delays, g.delays);
  EXPECT_EQ(back.positions, g.positions);
  EXPECT_EQ(back_labels, labels);
}

TEST(GraphIo, DirectoryRoundTrip) {
  Rng rng(16);
  std::vector<Geo2DGraph> gs;
  for (int i = 0; i < 3; ++i) gs.push_back(generate_graph(8, 3, rng));
  const auto dir = std::filesystem::temp_directory_path() / "dyncomm_graph_dir_test";
  std::filesystem::remove_all(dir);
  save_graph_dir(dir, gs);
  const auto back = load_graph_dir(dir);
  ASSERT_EQ(back.size(), gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) EXPECT_EQ(back[i].neighbors, gs[i].neighbors);
  std::filesystem::remove_all(dir);
}

TEST(GraphIo, MalformedJsonThrows) {
  EXPECT_ANY_THROW(graph_from_json("{\"L\": 3}"));
  EXPECT_ANY_THROW(graph_from_json("not json"));
}

}  // namespace
}  // namespace dyncomm
