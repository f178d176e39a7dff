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
#include "dyncomm/graph/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace dyncomm {

int Geo2DGraph::slot_of(int v, int u) const {
  const auto& nb = neighbors[v];
  for (int s = 0; s < static_cast<int>(nb.size()); ++s) {
    if (nb[s] == u) return s;
  }
  return -1;
}

int Geo2DGraph::edge_delay(int v, int u) const {
  const int s = slot_of(v, u);
  if (s < 0) {
    throw std::out_of_range("no edge " + std::to_string(v) + "-" + std::to_string(u));
  }
  return delays[v][s];
}

int Geo2DGraph::num_edges() const {
  int n = 0;
  for (const auto& nb : neighbors) n += static_cast<int>(nb.size());
  return n / 2;
}

bool Geo2DGraph::connected() const {
  if (L == 0) return true;
  std::vector<char> seen(L, 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int u : neighbors[v]) {
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(u);
      }
    }
  }
  return count == L;
}

void Geo2DGraph::validate() const {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("invalid graph: " + msg); };
  if (static_cast<int>(neighbors.size()) != L || static_cast<int>(delays.size()) != L) {
    fail("adjacency size != L");
  }
  for (int v = 0; v < L; ++v) {
    if (static_cast<int>(neighbors[v].size()) != D) fail("node " + std::to_string(v) + " degree");
    if (!std::is_sorted(neighbors[v].begin(), neighbors[v].end())) fail("unsorted slots");
    for (int s = 0; s < D; ++s) {
      const int u = neighbors[v][s];
      if (u < 0 || u >= L || u == v) fail("bad neighbor id");
      if (s > 0 && neighbors[v][s - 1] == u) fail("duplicate edge");
      if (delays[v][s] < 1) fail("delay < 1");
      const int back = slot_of(u, v);
      if (back < 0 || delays[u][back] != delays[v][s]) fail("asymmetric edge");
    }
  }
  if (!connected()) fail("disconnected");
}

namespace {

bool try_attach(int L, int D, const std::vector<std::array<double, 2>>& pos, Rng& rng,
                std::vector<std::vector<int>>& adj) {
  adj.assign(L, {});
  std::vector<int> order(L);
  std::iota(order.begin(), order.end(), 0);
  for (int i = L - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_int(0, i));
    std::swap(order[i], order[j]);
  }
  for (int v : order) {
    while (static_cast<int>(adj[v].size()) < D) {
      int best = -1;
      double best_d = std::numeric_limits<double>::infinity();
      for (int u = 0; u < L; ++u) {
        if (u == v || static_cast<int>(adj[u].size()) >= D) continue;
        if (std::find(adj[v].begin(), adj[v].end(), u) != adj[v].end()) continue;
        const double dx = pos[v][0] - pos[u][0];
        const double dy = pos[v][1] - pos[u][1];
        const double d = dx * dx + dy * dy;
        if (d < best_d) {  // strict: lower index wins ties
          best_d = d;
          best = u;
        }
      }
      if (best < 0) return false;
      adj[v].push_back(best);
      adj[best].push_back(v);
    }
  }
  return true;
}

}  // namespace

Geo2DGraph generate_graph(int L, int D, Rng& rng, const GraphGenConfig& cfg) {
  if (!(L > D && D >= 1)) throw std::invalid_argument("generate_graph requires L > D >= 1");
  if ((L * D) % 2 != 0) throw std::invalid_argument("generate_graph requires L*D even");
  std::vector<std::array<double, 2>> pos(L);
  std::vector<std::vector<int>> adj;
  for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
    for (auto& p : pos) {
      p[0] = rng.uniform();
      p[1] = rng.uniform();
    }
    if (!try_attach(L, D, pos, rng, adj)) continue;
    Geo2DGraph g;
    g.L = L;
    g.D = D;
    g.positions = pos;
    g.neighbors.resize(L);
    g.delays.resize(L);
    for (int v = 0; v < L; ++v) {
      auto nb = adj[v];
      std::sort(nb.begin(), nb.end());
      g.neighbors[v] = nb;
      for (int u : nb) {
        const double dist = std::hypot(pos[v][0] - pos[u][0], pos[v][1] - pos[u][1]);
        g.delays[v].push_back(std::max(1, static_cast<int>(std::lround(dist * cfg.delay_scale))));
      }
    }
    if (!g.connected()) continue;
    return g;
  }
  throw GenerationError("no valid graph after " + std::to_string(cfg.max_attempts) + " attempts");
}

Geo2DGraph graph_from_edges(int L, const std::vector<Edge>& edges,
                            std::vector<std::array<double, 2>> positions) {
  Geo2DGraph g;
  g.L = L;
  g.positions = positions.empty() ? std::vector<std::array<double, 2>>(L, {0.0, 0.0})
                                  : std::move(positions);
  std::vector<std::vector<std::pair<int, int>>> tmp(L);
  for (const auto& e : edges) {
    if (e.u < 0 || e.u >= L || e.v < 0 || e.v >= L || e.u == e.v) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    tmp[e.u].push_back({e.v, e.delay});
    tmp[e.v].push_back({e.u, e.delay});
  }
  g.neighbors.resize(L);
  g.delays.resize(L);
  g.D = L ? static_cast<int>(tmp[0].size()) : 0;
  for (int v = 0; v < L; ++v) {
    std::sort(tmp[v].begin(), tmp[v].end());
    for (auto [u, d] : tmp[v]) {
      g.neighbors[v].push_back(u);
      g.delays[v].push_back(d);
    }
  }
  return g;
}

std::vector<Edge> edge_list(const Geo2DGraph& g) {
  std::vector<Edge> out;
  for (int v = 0; v < g.L; ++v) {
    for (std::size_t s = 0; s < g.neighbors[v].size(); ++s) {
      const int u = g.neighbors[v][s];
      if (v < u) out.push_back({v, u, g.delays[v][s]});
    }
  }
  return out;
}

}  // namespace dyncomm
