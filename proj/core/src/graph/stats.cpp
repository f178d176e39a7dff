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
#include "dyncomm/graph/stats.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>

namespace dyncomm {

IntMatrix apsp(const Geo2DGraph& g, Metric metric) {
  const int L = g.L;
  IntMatrix dist = IntMatrix::Constant(L, L, -1);
  using Item = std::pair<int, int>;  // (distance, node)
  for (int s = 0; s < L; ++s) {
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    dist(s, s) = 0;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist(s, v)) continue;
      for (std::size_t k = 0; k < g.neighbors[v].size(); ++k) {
        const int u = g.neighbors[v][k];
        const int nd = d + (metric == Metric::kHops ? 1 : g.delays[v][k]);
        if (dist(s, u) < 0 || nd < dist(s, u)) {
          dist(s, u) = nd;
          pq.push({nd, u});
        }
      }
    }
  }
  return dist;
}

std::vector<double> betweenness(const Geo2DGraph& g) {
  const int L = g.L;
  std::vector<double> cb(L, 0.0);
  std::vector<int> stack;
  std::vector<std::vector<int>> pred(L);
  std::vector<double> sigma(L), delta(L);
  std::vector<int> dist(L);
  for (int s = 0; s < L; ++s) {
    stack.clear();
    for (int v = 0; v < L; ++v) pred[v].clear();
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(dist.begin(), dist.end(), -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      stack.push_back(v);
      for (int w : g.neighbors[v]) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          q.push(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          pred[w].push_back(v);
        }
      }
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    while (!stack.empty()) {
      const int w = stack.back();
      stack.pop_back();
      for (int v : pred[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  // Each unordered pair was counted from both endpoints.
  const double pairs = L > 2 ? (L - 1.0) * (L - 2.0) / 2.0 : 1.0;
  for (double& c : cb) c = c / 2.0 / pairs;
  return cb;
}

GraphStats compute_stats(const Geo2DGraph& g) {
  GraphStats st;
  st.apsp_hops = apsp(g, Metric::kHops);
  st.apsp_delay = apsp(g, Metric::kDelay);
  st.diameter_hops = st.apsp_hops.maxCoeff();
  st.diameter_delay = st.apsp_delay.maxCoeff();
  st.betweenness = betweenness(g);
  return st;
}

Summary summarize(std::span<const double> xs) {
  Summary s;
  s.count = xs.size();
  if (xs.empty()) return s;
  s.min = *std::min_element(xs.begin(), xs.end());
  s.max = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += x;
  s.mean = acc / static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - s.mean) * (x - s.mean);
  s.std = std::sqrt(var / static_cast<double>(xs.size()));
  return s;
}

BatchStats graph_stats(std::span<const Geo2DGraph> graphs) {
  std::map<std::string, std::vector<double>> pools;
  std::size_t under8 = 0;
  std::size_t offdiag = 0;
  for (const auto& g : graphs) {
    const GraphStats st = compute_stats(g);
    pools["order"].push_back(g.L);
    double deg = 0.0;
    for (const auto& nb : g.neighbors) deg += static_cast<double>(nb.size());
    pools["degree"].push_back(g.L ? deg / g.L : 0.0);
    pools["size"].push_back(g.num_edges());
    pools["diameter_hops"].push_back(st.diameter_hops);
    pools["diameter_delay"].push_back(st.diameter_delay);
    for (int i = 0; i < g.L; ++i) {
      for (int j = 0; j < g.L; ++j) {
        pools["apsp_hops"].push_back(st.apsp_hops(i, j));
        pools["apsp_delay"].push_back(st.apsp_delay(i, j));
        if (i != j) {
          ++offdiag;
          if (st.apsp_hops(i, j) < 8) ++under8;
        }
      }
    }
    for (double b : st.betweenness) pools["betweenness"].push_back(b);
  }
  BatchStats out;
  for (const auto& [k, v] : pools) out.metrics[k] = summarize(v);
  out.frac_paths_under_8_hops = offdiag ? static_cast<double>(under8) / offdiag : 1.0;
  return out;
}

}  // namespace dyncomm
