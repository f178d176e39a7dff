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
#include "dyncomm/eval/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace dyncomm {

namespace {

double* field(RoutingMetrics& m, std::string_view name) {
  if (name == "reward") return &m.reward;
  if (name == "throughput") return &m.throughput;
  if (name == "delay") return &m.delay;
  if (name == "blocked") return &m.blocked;
  if (name == "looped") return &m.looped;
  if (name == "spr_ratio") return &m.spr_ratio;
  if (name == "messages") return &m.messages;
  throw std::invalid_argument("unknown metric: " + std::string(name));
}

}  // namespace

double metric_value(const RoutingMetrics& m, std::string_view name) {
  return *field(const_cast<RoutingMetrics&>(m), name);
}

void set_metric(RoutingMetrics& m, std::string_view name, double v) { *field(m, name) = v; }

bool count_looped(std::vector<char>& visited, int node) {
  if (visited[node]) return true;
  visited[node] = 1;
  return false;
}

void MetricsAccumulator::begin_episode(const Geo2DGraph& g) {
  hops_ = apsp(g, Metric::kHops);
  ++m_.episodes;
}

void MetricsAccumulator::add_step(const StepResult& r, double messages_per_node) {
  for (double x : r.rewards) reward_ += x;
  for (const auto& d : r.events.deliveries) {
    delay_sum_ += d.delivered_step - d.spawn_step + 1;
    ratio_sum_ += static_cast<double>(d.hops_taken) / hops_(d.src, d.dst);
    ++m_.delivered;
  }
  blocked_ += r.events.n_blocked + r.events.n_inactive;
  looped_ += r.events.n_looped;
  messages_sum_ += messages_per_node;
  ++m_.steps;
}

void MetricsAccumulator::end_episode(int undelivered) { m_.censored += undelivered; }

RoutingMetrics MetricsAccumulator::result() const {
  RoutingMetrics m = m_;
  const double steps = static_cast<double>(m.steps);
  m.reward = m.episodes ? reward_ / m.episodes : 0.0;
  m.throughput = steps > 0 ? m.delivered / steps : 0.0;
  m.delay = m.delivered ? delay_sum_ / m.delivered : 0.0;
  m.spr_ratio = m.delivered ? ratio_sum_ / m.delivered : 0.0;
  m.blocked = steps > 0 ? blocked_ / steps : 0.0;
  m.looped = steps > 0 ? looped_ / steps : 0.0;
  m.messages = steps > 0 ? messages_sum_ / steps : 0.0;
  return m;
}

RoutingMetrics metrics_from_trace(const Geo2DGraph& g, std::span<const TraceRecord> trace,
                                  int n_packets) {
  const IntMatrix hops = apsp(g, Metric::kHops);
  std::vector<std::vector<char>> visited(n_packets, std::vector<char>(g.L, 0));
  std::vector<int> hops_taken(n_packets, 0);
  std::vector<char> fresh(n_packets, 1);
  RoutingMetrics m;
  m.episodes = 1;
  double reward = 0.0, delay = 0.0, ratio = 0.0;
  long blocked = 0, looped = 0;
  int last_step = -1;
  for (const auto& r : trace) {
    if (r.step != last_step) {
      ++m.steps;
      last_step = r.step;
    }
    reward += r.reward;
    if (fresh[r.packet]) {
      std::fill(visited[r.packet].begin(), visited[r.packet].end(), 0);
      visited[r.packet][r.src] = 1;
      hops_taken[r.packet] = 0;
      fresh[r.packet] = 0;
    }
    switch (r.event) {
      case PacketEvent::kBlocked:
      case PacketEvent::kInactive:
        ++blocked;
        break;
      case PacketEvent::kArrive:
      case PacketEvent::kDeliver:
        ++hops_taken[r.packet];
        looped += count_looped(visited[r.packet], r.node);
        break;
      default:
        break;
    }
    if (r.event == PacketEvent::kDeliver) {
      ++m.delivered;
      delay += r.step - r.spawn_step + 1;
      ratio += static_cast<double>(hops_taken[r.packet]) / hops(r.src, r.dst);
      fresh[r.packet] = 1;
    }
  }
  const double steps = static_cast<double>(m.steps);
  m.reward = reward;
  m.throughput = steps > 0 ? m.delivered / steps : 0.0;
  m.delay = m.delivered ? delay / m.delivered : 0.0;
  m.spr_ratio = m.delivered ? ratio / m.delivered : 0.0;
  m.blocked = steps > 0 ? blocked / steps : 0.0;
  m.looped = steps > 0 ? looped / steps : 0.0;
  m.censored = n_packets;
  return m;
}

RoutingMetrics metrics_mean(std::span<const RoutingMetrics> xs) {
  RoutingMetrics out;
  if (xs.empty()) return out;
  for (auto name : kMetricNames) {
    double s = 0.0;
    for (const auto& x : xs) s += metric_value(x, name);
    set_metric(out, name, s / xs.size());
  }
  for (const auto& x : xs) {
    out.episodes += x.episodes;
    out.steps += x.steps;
    out.delivered += x.delivered;
    out.censored += x.censored;
  }
  return out;
}

RoutingMetrics metrics_std(std::span<const RoutingMetrics> xs) {
  RoutingMetrics out;
  if (xs.empty()) return out;
  const RoutingMetrics mean = metrics_mean(xs);
  for (auto name : kMetricNames) {
    double s = 0.0;
    for (const auto& x : xs) {
      const double d = metric_value(x, name) - metric_value(mean, name);
      s += d * d;
    }
    set_metric(out, name, std::sqrt(s / xs.size()));
  }
  return out;
}

}  // namespace dyncomm
