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
#ifndef DYNCOMM_EVAL_METRICS_HPP_
#define DYNCOMM_EVAL_METRICS_HPP_

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "dyncomm/env/routing_env.hpp"
#include "dyncomm/graph/stats.hpp"

namespace dyncomm {

struct RoutingMetrics {
  double reward = 0.0;      // total reward per episode
  double throughput = 0.0;  // deliveries per step
  double delay = 0.0;       // steps from spawn to delivery, delivered packets only
  double blocked = 0.0;     // blocked + inactive-target events per step
  double looped = 0.0;      // revisits per step
  double spr_ratio = 0.0;   // hops taken / failure-free minimum hops
  double messages = 0.0;    // transmissions per node per step
  // Counts behind the means.
  long episodes = 0;
  long steps = 0;
  long delivered = 0;
  long censored = 0;  // packets still undelivered at the horizon
};

inline constexpr std::array<std::string_view, 7> kMetricNames = {
    "reward", "throughput", "delay", "blocked", "looped", "spr_ratio", "messages"};

double metric_value(const RoutingMetrics& m, std::string_view name);
void set_metric(RoutingMetrics& m, std::string_view name, double v);

// Marks node as visited; true when it already was.
bool count_looped(std::vector<char>& visited, int node);

// Streaming accumulator fed from environment step results.
class MetricsAccumulator {
 public:
  void begin_episode(const Geo2DGraph& g);
  void add_step(const StepResult& r, double messages_per_node);
  void end_episode(int undelivered);
  RoutingMetrics result() const;

 private:
  IntMatrix hops_;
  double reward_ = 0.0;
  double delay_sum_ = 0.0;
  double ratio_sum_ = 0.0;
  double messages_sum_ = 0.0;
  long blocked_ = 0;
  long looped_ = 0;
  RoutingMetrics m_;
};

// Recomputes everything except messages from an episode trace. Packets
// start at their src; visited sets reset when a packet is delivered.
RoutingMetrics metrics_from_trace(const Geo2DGraph& g, std::span<const TraceRecord> trace,
                                  int n_packets);

// Mean and population std across runs, field by field.
RoutingMetrics metrics_mean(std::span<const RoutingMetrics> xs);
RoutingMetrics metrics_std(std::span<const RoutingMetrics> xs);

}  // namespace dyncomm

#endif  // DYNCOMM_EVAL_METRICS_HPP_
