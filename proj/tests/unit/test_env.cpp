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

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "dyncomm/env/routing_env.hpp"
#include "dyncomm/eval/evaluate.hpp"
#include "dyncomm/graph/graph.hpp"
#include "dyncomm/rng.hpp"

namespace dyncomm {
namespace {

EnvConfig no_failures(int packets) {
  EnvConfig c;
  c.n_packets = packets;
  c.failure_prob = 0.0;
  return c;
}

Geo2DGraph triangle() { return graph_from_edges(3, {{0, 1, 1}, {1, 2, 1}, {0, 2, 2}}); }

TEST(Env, ObservationWidths) {
  EXPECT_EQ(node_obs_width(20, 3), 88);
  EXPECT_EQ(agent_obs_width(20, 3, 20), 149);
}

TEST(Env, ResetSpawnsDistinctPairs) {
  Rng grng(1), erng(2);
  const Geo2DGraph g = generate_graph(20, 3, grng);
  RoutingEnv env;
  env.reset(g, erng);
  ASSERT_EQ(env.packets().size(), 20u);
  for (std::size_t i = 0; i < env.packets().size(); ++i) {
    const Packet& p = env.packets()[i];
    EXPECT_NE(p.src, p.dst);
    EXPECT_EQ(p.current, p.src);
    EXPECT_GE(p.size, 0.0);
    EXPECT_LT(p.size, 1.0);
    for (std::size_t j = 0; j < i; ++j) {
      EXPECT_FALSE(env.packets()[j].src == p.src && env.packets()[j].dst == p.dst);
    }
  }
  EXPECT_EQ(env.inactive_count(), 0);
}

TEST(Env, RejectsBadActions) {
  Rng rng(3);
  RoutingEnv env(no_failures(2));
  env.reset(triangle(), rng);
  const std::vector<int> too_few = {0};
  const std::vector<int> out_of_range = {0, 3};
  EXPECT_THROW(env.step(too_few), std::invalid_argument);
  EXPECT_THROW(env.step(out_of_range), std::out_of_range);
}

TEST(Env, OracleRoutingDeliversWithTransitDelay) {
  Rng rng(4);
  RoutingEnv env(no_failures(1));
  const Geo2DGraph g = triangle();
  env.reset(g, rng);
  const IntMatrix next = oracle_next_slot(g);
  const Packet start = env.packets()[0];
  int steps = 0;
  bool delivered = false;
  while (!delivered && steps < 10) {
    const Packet& p = env.packets()[0];
    std::vector<int> a = {p.on_edge ? 0 : next(p.current, p.dst) + 1};
    StepResult r = env.step(a);
    ++steps;
    if (r.done[0]) {
      delivered = true;
      EXPECT_EQ(r.rewards[0], 10.0);
      EXPECT_EQ(r.events.event[0], PacketEvent::kDeliver);
      ASSERT_EQ(r.events.deliveries.size(), 1u);
      EXPECT_EQ(r.events.deliveries[0].src, start.src);
      EXPECT_EQ(r.events.deliveries[0].dst, start.dst);
    } else {
      EXPECT_EQ(r.rewards[0], 0.0);
    }
  }
  ASSERT_TRUE(delivered);
  // Unit-delay shortest path: 0-1-2 costs 2 either way, direct edges cost 1.
  const IntMatrix d = apsp(g, Metric::kDelay);
  EXPECT_EQ(steps, d(start.src, start.dst));
  // Respawned at the next step index.
  EXPECT_EQ(env.packets()[0].spawn_step, steps);
  EXPECT_EQ(env.packets()[0].current, env.packets()[0].src);
}

TEST(Env, BandwidthContentionBlocksHigherIds) {
  Rng rng(5);
  RoutingEnv env(no_failures(12));
  env.reset(triangle(), rng);
  std::vector<int> at(3, 0);
  for (const auto& p : env.packets()) ++at[p.current];
  const int occupied = static_cast<int>(std::count_if(at.begin(), at.end(), [](int c) { return c > 0; }));
  const std::vector<int> a(12, 1);
  StepResult r = env.step(a);
  EXPECT_EQ(r.events.n_blocked, 12 - occupied);
  EXPECT_EQ(r.events.max_edge_occupancy, 1);
  std::vector<char> seen(3, 0);
  for (int i = 0; i < 12; ++i) {
    const bool blocked = r.events.event[i] == PacketEvent::kBlocked;
    EXPECT_EQ(r.rewards[i], blocked ? -0.2 : (r.done[i] ? 10.0 : 0.0));
  }
}

TEST(Env, FailuresRespectCapAndDurations) {
  Rng grng(6), erng(7);
  EnvConfig cfg;
  cfg.failure_prob = 1.0;
  RoutingEnv env(cfg);
  const Geo2DGraph g = generate_graph(20, 3, grng);
  env.reset(g, erng);
  std::vector<int> run(20, 0);
  std::vector<int> expected(20, 0);
  const std::vector<int> wait(20, 0);
  for (int t = 0; t < 200; ++t) {
    StepResult r = env.step(wait);
    EXPECT_LE(env.inactive_count(), 8);
    for (const auto& f : r.events.failures) {
      EXPECT_GE(f.duration, 5);
      EXPECT_LE(f.duration, 10);
      EXPECT_EQ(f.onset, t + 1);
      expected[f.node] = f.duration;
    }
    for (int v = 0; v < 20; ++v) {
      if (env.inactive()[v]) {
        ++run[v];
      } else if (run[v] > 0) {
        EXPECT_EQ(run[v], expected[v]);
        run[v] = 0;
      }
    }
  }
  // With certain failure the cap is hit right after the first step.
  Rng erng2(7);
  env.reset(g, erng2);
  env.step(wait);
  EXPECT_EQ(env.inactive_count(), 8);
}

TEST(Env, InactiveTargetsAndFrozenPackets) {
  Rng grng(8), erng(9);
  EnvConfig cfg;
  cfg.failure_prob = 1.0;
  RoutingEnv env(cfg);
  const Geo2DGraph g = generate_graph(20, 3, grng);
  env.reset(g, erng);
  env.step(std::vector<int>(20, 0));
  std::vector<int> a(20, 0);
  std::vector<int> expect_inactive;
  std::vector<int> expect_frozen;
  for (int i = 0; i < 20; ++i) {
    const Packet& p = env.packets()[i];
    if (env.inactive()[p.current]) {
      a[i] = 1;
      expect_frozen.push_back(i);
      continue;
    }
    for (int s = 0; s < g.D; ++s) {
      if (env.inactive()[g.neighbor(p.current, s)]) {
        a[i] = s + 1;
        expect_inactive.push_back(i);
        break;
      }
    }
  }
  ASSERT_FALSE(expect_inactive.empty());
  StepResult r = env.step(a);
  for (int i : expect_inactive) {
    EXPECT_EQ(r.events.event[i], PacketEvent::kInactive);
    EXPECT_EQ(r.rewards[i], -0.2);
  }
  for (int i : expect_frozen) {
    EXPECT_EQ(r.events.event[i], PacketEvent::kFrozen);
    EXPECT_EQ(r.rewards[i], 0.0);
  }
  EXPECT_EQ(r.events.n_inactive, static_cast<int>(expect_inactive.size()));
}

TEST(Env, LoopsAreFlaggedOnRevisit) {
  Rng rng(10);
  RoutingEnv env(no_failures(1));
  const Geo2DGraph g = graph_from_edges(4, {{0, 1, 1}, {1, 2, 1}, {2, 3, 1}, {3, 0, 1}});
  env.reset(g, rng);
  const int src = env.packets()[0].src;
  const int dst = env.packets()[0].dst;
  // Bounce to a neighbor that is not the destination and back.
  int slot = g.neighbor(src, 0) == dst ? 1 : 0;
  const int mid = g.neighbor(src, slot);
  if (mid == dst) GTEST_SKIP() << "both neighbors are the destination";
  StepResult r1 = env.step(std::vector<int>{slot + 1});
  EXPECT_EQ(r1.events.event[0], PacketEvent::kArrive);
  EXPECT_EQ(r1.events.looped[0], 0);
  StepResult r2 = env.step(std::vector<int>{g.slot_of(mid, src) + 1});
  EXPECT_EQ(r2.events.looped[0], 1);
  EXPECT_EQ(r2.events.n_looped, 1);
  EXPECT_EQ(env.packets()[0].previous, mid);
}

TEST(Env, NodeObservationLayout) {
  Rng grng(11), erng(12);
  const Geo2DGraph g = generate_graph(20, 3, grng);
  RoutingEnv env;
  env.reset(g, erng);
  const nn::Matrix obs = env.node_observations();
  ASSERT_EQ(obs.cols(), 88);
  double count = 0.0, load = 0.0;
  for (const auto& p : env.packets()) load += p.size;
  for (int v = 0; v < 20; ++v) {
    EXPECT_EQ(obs(v, v), 1.0);
    EXPECT_EQ(obs.row(v).head(20).sum(), 1.0);
    count += obs(v, 20);
    for (int s = 0; s < 3; ++s) {
      const int off = 22 + s * 22;
      EXPECT_EQ(obs(v, off + g.neighbor(v, s)), 1.0);
      EXPECT_EQ(obs(v, off + 20), g.delay(v, s));
      EXPECT_EQ(obs(v, off + 21), 0.0);
    }
  }
  EXPECT_EQ(count, 20.0);
  EXPECT_NEAR(obs.col(21).sum(), load, 1e-12);
}

TEST(Env, AgentObservationLayout) {
  Rng grng(13), erng(14);
  const Geo2DGraph g = generate_graph(20, 3, grng);
  RoutingEnv env;
  env.reset(g, erng);
  const nn::Matrix obs = env.agent_observations();
  ASSERT_EQ(obs.rows(), 20);
  ASSERT_EQ(obs.cols(), 149);
  for (int i = 0; i < 20; ++i) {
    const Packet& p = env.packets()[i];
    EXPECT_EQ(obs(i, i), 1.0);
    EXPECT_EQ(obs(i, 20), p.size);
    EXPECT_EQ(obs(i, 21 + p.dst), 1.0);
    EXPECT_EQ(obs(i, 41 + p.current), 1.0);
    EXPECT_EQ(obs.row(i).segment(61, 20).sum(), 0.0);  // no previous node yet
    EXPECT_EQ(obs(i, 81), 0.0);
    EXPECT_EQ(obs(i, 82), 0.0);
  }
}

TEST(Env, SameSeedSameTrajectory) {
  Rng grng(15);
  const Geo2DGraph g = generate_graph(20, 3, grng);
  auto run = [&](std::uint64_t seed) {
    Rng erng(seed), arng(seed + 100);
    RoutingEnv env;
    env.reset(g, erng);
    env.enable_trace(true);
    for (int t = 0; t < 100; ++t) {
      std::vector<int> a(20);
      for (int& x : a) x = static_cast<int>(arng.uniform_int(0, 3));
      env.step(a);
    }
    std::ostringstream os;
    write_trace_jsonl(os, env.trace());
    return os.str();
  };
  EXPECT_EQ(run(1), run(1));
  EXPECT_NE(run(1), run(2));
}

}  // namespace
}  // namespace dyncomm
