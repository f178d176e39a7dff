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
#include <limits>
#include <vector>

#include "dyncomm/eval/compare.hpp"
#include "dyncomm/eval/evaluate.hpp"
#include "dyncomm/eval/metrics.hpp"
#include "dyncomm/graph/graph.hpp"

namespace dyncomm {
namespace {

std::vector<Geo2DGraph> graphs(int n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Geo2DGraph> out;
  for (int i = 0; i < n; ++i) out.push_back(generate_graph(20, 3, rng));
  return out;
}

void expect_same_metrics(const RoutingMetrics& a, const RoutingMetrics& b) {
  for (auto name : kMetricNames) {
    if (name == "messages") continue;
    EXPECT_NEAR(metric_value(a, name), metric_value(b, name), 1e-9) << name;
  }
  EXPECT_EQ(a.delivered, b.delivered);
  EXPECT_EQ(a.steps, b.steps);
}

TEST(Metrics, NamesRoundTrip) {
  RoutingMetrics m;
  double v = 1.0;
  for (auto name : kMetricNames) set_metric(m, name, v++);
  v = 1.0;
  for (auto name : kMetricNames) EXPECT_EQ(metric_value(m, name), v++);
  EXPECT_THROW(metric_value(m, "latency"), std::invalid_argument);
}

TEST(Metrics, CountLooped) {
  std::vector<char> visited(4, 0);
  EXPECT_FALSE(count_looped(visited, 2));
  EXPECT_TRUE(count_looped(visited, 2));
  EXPECT_FALSE(count_looped(visited, 1));
}

TEST(Metrics, MeanAndPopulationStd) {
  RoutingMetrics a, b;
  a.reward = 2.0;
  b.reward = 6.0;
  a.delivered = 3;
  b.delivered = 4;
  const std::vector<RoutingMetrics> xs = {a, b};
  EXPECT_EQ(metrics_mean(xs).reward, 4.0);
  EXPECT_EQ(metrics_std(xs).reward, 2.0);
  EXPECT_EQ(metrics_mean(xs).delivered, 7);
}

TEST(Evaluate, AccumulatorAgreesWithTraceRecount) {
  const auto gs = graphs(5, 1);
  EvalConfig cfg;
  cfg.horizon = 200;
  for (auto policy : {PolicyKind::kRandom, PolicyKind::kOracle}) {
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const EpisodeOutput o = run_episode(gs[i], policy, nullptr, cfg, 100 + i, true);
      ASSERT_EQ(o.trace.size(), 200u * 20u);
      expect_same_metrics(o.metrics, metrics_from_trace(gs[i], o.trace, 20));
    }
  }
}

TEST(Evaluate, OracleNextSlotFollowsShortestPaths) {
  for (const auto& g : graphs(10, 2)) {
    const IntMatrix next = oracle_next_slot(g);
    const IntMatrix d = apsp(g, Metric::kDelay);
    for (int v = 0; v < g.L; ++v) {
      for (int t = 0; t < g.L; ++t) {
        if (v == t) {
          EXPECT_EQ(next(v, t), -1);
          continue;
        }
        const int s = next(v, t);
        ASSERT_GE(s, 0);
        EXPECT_EQ(g.delay(v, s) + d(g.neighbor(v, s), t), d(v, t));
      }
    }
  }
}

TEST(Evaluate, LonePacketOracleDelayEqualsDistance) {
  const auto gs = graphs(5, 3);
  EvalConfig cfg;
  cfg.env.n_packets = 1;
  cfg.env.failure_prob = 0.0;
  cfg.horizon = 300;
  for (const auto& g : gs) {
    const IntMatrix d = apsp(g, Metric::kDelay);
    const EpisodeOutput o = run_episode(g, PolicyKind::kOracle, nullptr, cfg, 7, true);
    int deliveries = 0;
    for (const auto& r : o.trace) {
      if (r.event != PacketEvent::kDeliver) continue;
      ++deliveries;
      EXPECT_EQ(r.step - r.spawn_step + 1, d(r.src, r.dst));
    }
    EXPECT_GT(deliveries, 0);
    EXPECT_EQ(o.metrics.blocked, 0.0);
    EXPECT_EQ(o.metrics.looped, 0.0);
  }
}

TEST(Evaluate, OracleBeatsRandom) {
  const auto gs = graphs(20, 4);
  EvalConfig cfg;
  cfg.horizon = 100;
  const std::vector<std::uint64_t> seeds = {1, 2};
  const PolicyEvaluation r = evaluate_policy(gs, PolicyKind::kRandom, nullptr, cfg, seeds);
  const PolicyEvaluation o = evaluate_policy(gs, PolicyKind::kOracle, nullptr, cfg, seeds);
  EXPECT_GT(o.mean.throughput, r.mean.throughput);
  EXPECT_LT(o.mean.delay, r.mean.delay);
  EXPECT_GE(o.mean.spr_ratio, 1.0);
}

TEST(Evaluate, SeedsAreReproducibleAndPooled) {
  const auto gs = graphs(4, 5);
  EvalConfig cfg;
  cfg.horizon = 50;
  const std::vector<std::uint64_t> seeds = {3, 4};
  const PolicyEvaluation a = evaluate_policy(gs, PolicyKind::kRandom, nullptr, cfg, seeds);
  const PolicyEvaluation b = evaluate_policy(gs, PolicyKind::kRandom, nullptr, cfg, seeds);
  ASSERT_EQ(a.per_seed.size(), 2u);
  for (auto name : kMetricNames) {
    EXPECT_EQ(metric_value(a.mean, name), metric_value(b.mean, name));
  }
  EXPECT_EQ(a.per_seed[0].episodes, 4);
  EXPECT_EQ(a.per_seed[0].steps, 200);
  EXPECT_NEAR(a.mean.reward, 0.5 * (a.per_seed[0].reward + a.per_seed[1].reward), 1e-12);
  EXPECT_THROW(run_episode(gs[0], PolicyKind::kLearned, nullptr, cfg, 1), std::invalid_argument);
  EXPECT_THROW(parse_policy("greedy"), std::invalid_argument);
}

TEST(Compare, RelativeChange) {
  const MetricDelta d = relative_change(10.0, 1.0, 12.0, 2.0);
  EXPECT_NEAR(d.pct, 20.0, 1e-12);
  // r = o / b; sigma_r = r * sqrt((sb / b)^2 + (so / o)^2).
  const double r = 1.2;
  EXPECT_NEAR(d.std_pct, 100.0 * r * std::sqrt(0.01 + (2.0 / 12.0) * (2.0 / 12.0)), 1e-9);
  EXPECT_NEAR(relative_change(-4.0, 0.0, -2.0, 0.0).pct, 50.0, 1e-12);
  EXPECT_TRUE(std::isnan(relative_change(0.0, 0.0, 1.0, 0.0).pct));
  EXPECT_EQ(relative_change(0.0, 0.0, 0.0, 0.0).pct, 0.0);
}

TEST(Compare, JsonLayoutAndNulls) {
  RunSummary a, b, c;
  a.name = "a";
  b.name = "b";
  c.name = "c";
  a.mean.reward = 10.0;
  b.mean.reward = 11.0;
  c.mean.reward = 9.0;
  const std::vector<RunSummary> runs = {a, b, c};
  const auto j = compare_runs(runs);
  ASSERT_EQ(j["pairs"].size(), 3u);
  EXPECT_EQ(j["pairs"][0]["base"], "a");
  EXPECT_EQ(j["pairs"][0]["other"], "b");
  EXPECT_NEAR(j["pairs"][0]["metrics"]["reward"]["pct"].get<double>(), 10.0, 1e-12);
  EXPECT_TRUE(j["pairs"][0]["metrics"]["throughput"]["pct"].is_number());
  a.mean.delay = 0.0;
  b.mean.delay = 1.0;
  const std::vector<RunSummary> two = {a, b};
  EXPECT_TRUE(compare_runs(two)["pairs"][0]["metrics"]["delay"]["pct"].is_null());
  const RunSummary back = summary_from_json(summary_to_json(b));
  EXPECT_EQ(back.name, "b");
  EXPECT_EQ(back.mean.reward, 11.0);
}

}  // namespace
}  // namespace dyncomm
