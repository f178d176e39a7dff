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
#include "dyncomm/eval/evaluate.hpp"

#include <algorithm>
#include <stdexcept>

namespace dyncomm {

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::kLearned: return "learned";
    case PolicyKind::kRandom: return "random";
    case PolicyKind::kOracle: return "oracle";
  }
  return "?";
}

PolicyKind parse_policy(const std::string& s) {
  if (s == "learned") return PolicyKind::kLearned;
  if (s == "random") return PolicyKind::kRandom;
  if (s == "oracle") return PolicyKind::kOracle;
  throw std::invalid_argument("unknown policy: " + s);
}

IntMatrix oracle_next_slot(const Geo2DGraph& g) {
  const IntMatrix dist = apsp(g, Metric::kDelay);
  IntMatrix next = IntMatrix::Constant(g.L, g.L, -1);
  for (int v = 0; v < g.L; ++v) {
    for (int t = 0; t < g.L; ++t) {
      if (v == t) continue;
      int best = -1;
      for (int s = 0; s < g.D; ++s) {
        const int u = g.neighbors[v][s];
        if (dist(u, t) < 0) continue;
        const int c = g.delays[v][s] + dist(u, t);
        if (best < 0 || c < g.delays[v][best] + dist(g.neighbors[v][best], t)) best = s;
      }
      next(v, t) = best;
    }
  }
  return next;
}

EpisodeOutput run_episode(const Geo2DGraph& g, PolicyKind policy, RoutingAgent* agent,
                          const EvalConfig& cfg, std::uint64_t seed, bool keep_trace) {
  if (policy == PolicyKind::kLearned && agent == nullptr) {
    throw std::invalid_argument("run_episode: learned policy needs an agent");
  }
  Rng env_rng = Rng::stream(seed, "env");
  Rng explore = Rng::stream(seed, "exploration");
  Rng noise = Rng::stream(seed, "controller-noise");
  RoutingEnv env(cfg.env);
  env.enable_trace(keep_trace);
  env.reset(g, env_rng);
  const IntMatrix next = policy == PolicyKind::kOracle ? oracle_next_slot(g) : IntMatrix();
  nn::Matrix carry;
  if (policy == PolicyKind::kLearned) carry = nn::Matrix::Zero(g.L, agent->model.config().hidden);

  MetricsAccumulator acc;
  acc.begin_episode(g);
  std::vector<double> round_rate;
  std::vector<int> actions(cfg.env.n_packets, 0);
  for (int t = 0; t < cfg.horizon; ++t) {
    double msgs = 0.0;
    const auto& snap = env.snapshot();
    switch (policy) {
      case PolicyKind::kLearned: {
        ActResult a = act(*agent, g, snap, carry, Mode::kEval, noise.next_u64(), 0.0, explore);
        actions = std::move(a.actions);
        carry = std::move(a.carry);
        msgs = a.log.per_node(g.L);
        round_rate.resize(a.log.rounds, 0.0);
        for (int k = 0; k < a.log.rounds; ++k) {
          round_rate[k] += static_cast<double>(a.log.round_total(k)) / (g.L * g.D);
        }
        break;
      }
      case PolicyKind::kRandom:
        for (std::size_t i = 0; i < actions.size(); ++i) {
          actions[i] = is_decision_state(snap.packets[i], snap.inactive)
                           ? static_cast<int>(explore.uniform_int(0, g.D))
                           : 0;
        }
        break;
      case PolicyKind::kOracle:
        for (std::size_t i = 0; i < actions.size(); ++i) {
          const Packet& p = snap.packets[i];
          actions[i] = is_decision_state(p, snap.inactive) ? next(p.current, p.dst) + 1 : 0;
        }
        break;
    }
    acc.add_step(env.step(actions), msgs);
  }
  acc.end_episode(cfg.env.n_packets);
  EpisodeOutput out;
  out.metrics = acc.result();
  for (double& r : round_rate) r /= cfg.horizon;
  out.round_rate = std::move(round_rate);
  if (keep_trace) out.trace = env.trace();
  return out;
}

PolicyEvaluation evaluate_policy(std::span<const Geo2DGraph> graphs, PolicyKind policy,
                                 RoutingAgent* agent, const EvalConfig& cfg,
                                 std::span<const std::uint64_t> seeds) {
  PolicyEvaluation ev;
  long episodes = 0;
  for (std::uint64_t seed : seeds) {
    std::vector<RoutingMetrics> per_graph;
    per_graph.reserve(graphs.size());
    for (std::size_t i = 0; i < graphs.size(); ++i) {
      EpisodeOutput o = run_episode(graphs[i], policy, agent, cfg, splitmix64(seed + i));
      per_graph.push_back(o.metrics);
      ev.round_rate.resize(std::max(ev.round_rate.size(), o.round_rate.size()), 0.0);
      for (std::size_t k = 0; k < o.round_rate.size(); ++k) ev.round_rate[k] += o.round_rate[k];
      ++episodes;
    }
    // Every episode has the same horizon, so averaging per-episode rates
    // equals pooling, except delay and spr_ratio which weight by deliveries.
    RoutingMetrics pooled = metrics_mean(per_graph);
    double delay = 0.0, ratio = 0.0;
    for (const auto& m : per_graph) {
      delay += m.delay * m.delivered;
      ratio += m.spr_ratio * m.delivered;
    }
    pooled.delay = pooled.delivered ? delay / pooled.delivered : 0.0;
    pooled.spr_ratio = pooled.delivered ? ratio / pooled.delivered : 0.0;
    ev.seeds.push_back(seed);
    ev.per_seed.push_back(pooled);
  }
  for (double& r : ev.round_rate) r /= episodes;
  ev.mean = metrics_mean(ev.per_seed);
  ev.std = metrics_std(ev.per_seed);
  return ev;
}

}  // namespace dyncomm
