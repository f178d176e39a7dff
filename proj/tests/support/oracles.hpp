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

#ifndef DYNCOMM_TESTS_SUPPORT_ORACLES_HPP_
#define DYNCOMM_TESTS_SUPPORT_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "dyncomm/graph/graph.hpp"
#include "dyncomm/graph/stats.hpp"
#include "dyncomm/nn/tensor.hpp"

namespace dyncomm::testing {

// Floyd-Warshall on the edge weights (1 per edge for hops); -1 if unreachable.
inline IntMatrix floyd_warshall(const Geo2DGraph& g, Metric metric) {
  constexpr long kInf = std::numeric_limits<long>::max() / 4;
  std::vector<long> d(static_cast<std::size_t>(g.L) * g.L, kInf);
  auto at = [&](int i, int j) -> long& { return d[static_cast<std::size_t>(i) * g.L + j]; };
  for (int v = 0; v < g.L; ++v) {
    at(v, v) = 0;
    for (int s = 0; s < g.D; ++s) {
      const long w = metric == Metric::kHops ? 1 : g.delays[v][s];
      at(v, g.neighbors[v][s]) = std::min(at(v, g.neighbors[v][s]), w);
    }
  }
  for (int k = 0; k < g.L; ++k)
    for (int i = 0; i < g.L; ++i)
      for (int j = 0; j < g.L; ++j)
        if (at(i, k) + at(k, j) < at(i, j)) at(i, j) = at(i, k) + at(k, j);
  IntMatrix out(g.L, g.L);
  for (int i = 0; i < g.L; ++i)
    for (int j = 0; j < g.L; ++j) out(i, j) = at(i, j) >= kInf ? -1 : static_cast<int>(at(i, j));
  return out;
}

// Betweenness by enumerating every simple path between each pair and
// keeping the minimum-hop ones. Exponential; meant for L <= 8.
inline std::vector<double> brute_force_betweenness(const Geo2DGraph& g) {
  const int L = g.L;
  std::vector<double> b(L, 0.0);
  for (int s = 0; s < L; ++s) {
    for (int t = s + 1; t < L; ++t) {
      std::vector<std::vector<int>> paths;
      std::vector<int> path = {s};
      std::vector<char> on(L, 0);
      on[s] = 1;
      std::function<void(int)> dfs = [&](int v) {
        if (v == t) {
          paths.push_back(path);
          return;
        }
        for (int u : g.neighbors[v]) {
          if (on[u]) continue;
          on[u] = 1;
          path.push_back(u);
          dfs(u);
          path.pop_back();
          on[u] = 0;
        }
      };
      dfs(s);
      if (paths.empty()) continue;
      std::size_t best = paths.front().size();
      for (const auto& p : paths) best = std::min(best, p.size());
      double n_short = 0.0;
      std::vector<double> through(L, 0.0);
      for (const auto& p : paths) {
        if (p.size() != best) continue;
        n_short += 1.0;
        for (std::size_t i = 1; i + 1 < p.size(); ++i) through[p[i]] += 1.0;
      }
      for (int v = 0; v < L; ++v) b[v] += through[v] / n_short;
    }
  }
  const double pairs = (L - 1.0) * (L - 2.0) / 2.0;
  for (double& x : b) x = pairs > 0 ? x / pairs : 0.0;
  return b;
}

struct FdResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

// Central-difference check of every entry of every parameter (or every
// `stride`-th entry). loss(tape) must build a 1x1 loss from `params` on the
// given tape. Relative error is |a - n| / max(|a|, |n|, floor).
inline FdResult finite_difference_check(nn::ParamSet& params,
                                        const std::function<nn::Var(nn::Tape&)>& loss,
                                        double eps = 1e-5, std::size_t stride = 1,
                                        double floor = 1e-6) {
  params.zero_grad();
  {
    nn::Tape t;
    nn::Var l = loss(t);
    t.backward(l);
  }
  FdResult r;
  std::size_t counter = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    nn::Parameter& p = params[i];
    for (Eigen::Index k = 0; k < p.value.size(); ++k) {
      if (counter++ % stride != 0) continue;
      double& x = p.value.data()[k];
      const double x0 = x;
      x = x0 + eps;
      double up, down;
      {
        nn::Tape t(false);
        up = loss(t).value()(0, 0);
      }
      x = x0 - eps;
      {
        nn::Tape t(false);
        down = loss(t).value()(0, 0);
      }
      x = x0;
      const double numeric = (up - down) / (2.0 * eps);
      const double analytic = p.grad.data()[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
      r.max_rel_error = std::max(r.max_rel_error, std::abs(analytic - numeric) / denom);
      ++r.checked;
    }
  }
  return r;
}

}  // namespace dyncomm::testing

#endif  // DYNCOMM_TESTS_SUPPORT_ORACLES_HPP_
