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
#ifndef DYNCOMM_ENV_ROUTING_ENV_HPP_
#define DYNCOMM_ENV_ROUTING_ENV_HPP_

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dyncomm/graph/graph.hpp"
#include "dyncomm/nn/tensor.hpp"
#include "dyncomm/rng.hpp"

namespace dyncomm {

struct EnvConfig {
  int n_packets = 20;
  double failure_prob = 0.2;
  int failure_min = 5;
  int failure_max = 10;
  double max_inactive_frac = 0.4;
  int bandwidth = 1;  // packets per directed edge
  double reward_deliver = 10.0;
  double reward_blocked = -0.2;
  double reward_inactive = -0.2;
};

// Plain packet record. While on an edge, `current` is the departure node
// and `next` the node it is heading to.
struct Packet {
  int id = 0;
  double size = 0.0;
  int src = 0;
  int dst = 0;
  int current = 0;
  int previous = -1;  // -1: none
  int next = -1;
  bool on_edge = false;
  int remaining = 0;
  int spawn_step = 0;
  int hops_taken = 0;
};

// Everything the observations depend on.
struct EnvSnapshot {
  std::vector<Packet> packets;
  std::vector<char> inactive;
};

enum class PacketEvent : std::uint8_t {
  kWait,      // at a node, action 0
  kFrozen,    // at an inactive node, action ignored
  kInTransit,
  kDepart,    // left a node, still on the edge
  kInactive,  // tried to route to an inactive node
  kBlocked,   // lost edge contention
  kArrive,    // reached an intermediate node
  kDeliver,
};

const char* to_string(PacketEvent e);

struct Delivery {
  int packet = 0;
  int src = 0;
  int dst = 0;
  int spawn_step = 0;
  int delivered_step = 0;  // step index at which it arrived
  int hops_taken = 0;
};

struct FailureOnset {
  int node = 0;
  int onset = 0;     // first step index at which the node is inactive
  int duration = 0;  // inactive for steps [onset, onset + duration)
};

struct StepEvents {
  std::vector<PacketEvent> event;  // per packet
  std::vector<char> looped;        // per packet: arrival at a visited node
  std::vector<Delivery> deliveries;
  std::vector<FailureOnset> failures;
  std::vector<int> recoveries;
  int n_blocked = 0;
  int n_inactive = 0;
  int n_looped = 0;
  int max_edge_occupancy = 0;
  // Active, not-just-recovered nodes that drew a failure while below the cap.
  int failure_draws = 0;
};

struct StepResult {
  std::vector<double> rewards;  // per packet
  std::vector<char> done;       // per packet: delivered this step
  StepEvents events;
};

// One trace line per packet per step. node is the packet's position after
// transit (departure node while on an edge); src, dst and spawn_step
// describe the packet that took the action.
struct TraceRecord {
  int step;
  int packet;
  int action;
  PacketEvent event;
  double reward;
  int node;
  int src;
  int dst;
  int spawn_step;
};
void write_trace_jsonl(std::ostream& os, std::span<const TraceRecord> trace);

// Observation widths.
int node_obs_width(int L, int D);
int agent_obs_width(int L, int D, int n_packets);

// Row v: one-hot id | packet count | total load | D x (one-hot neighbor id,
// edge delay, load in transit on v -> neighbor).
nn::Matrix node_observations(const Geo2DGraph& g, const EnvSnapshot& s);
// Row p: one-hot packet id | size | one-hot dst | one-hot current |
// one-hot previous (zeros if none) | on_edge | remaining | D x neighbor
// block of the current node.
nn::Matrix agent_observations(const Geo2DGraph& g, const EnvSnapshot& s);

class RoutingEnv {
 public:
  explicit RoutingEnv(EnvConfig cfg = {});

  // Spawns n_packets at distinct (src, dst) pairs and clears failures.
  // The environment draws from `rng` until the next reset; it must outlive
  // those calls.
  void reset(const Geo2DGraph& g, Rng& rng);

  // actions[p] in [0, D]; 0 waits, a >= 1 routes to neighbor slot a - 1.
  // Ignored for packets on edges or at inactive nodes.
  StepResult step(std::span<const int> actions);

  // Recovers expired failures, then samples new ones under the cap.
  void advance_failures();
  void advance_failures(StepEvents* ev);

  const Geo2DGraph& graph() const { return graph_; }
  const EnvConfig& config() const { return cfg_; }
  const std::vector<Packet>& packets() const { return snap_.packets; }
  const std::vector<char>& inactive() const { return snap_.inactive; }
  const EnvSnapshot& snapshot() const { return snap_; }
  int step_index() const { return step_; }
  bool visited(int packet, int node) const { return visited_[packet][node] != 0; }
  int inactive_count() const;

  nn::Matrix node_observations() const { return dyncomm::node_observations(graph_, snap_); }
  nn::Matrix agent_observations() const { return dyncomm::agent_observations(graph_, snap_); }

  // When enabled, every step appends one record per packet.
  void enable_trace(bool on) { trace_on_ = on; }
  const std::vector<TraceRecord>& trace() const { return trace_; }

 private:
  void spawn(int p, int step, bool distinct_pair);
  int max_inactive() const;

  EnvConfig cfg_;
  Geo2DGraph graph_;
  Rng* rng_ = nullptr;
  EnvSnapshot snap_;
  std::vector<int> recover_at_;
  std::vector<std::vector<char>> visited_;
  int step_ = 0;
  bool trace_on_ = false;
  std::vector<TraceRecord> trace_;
};

}  // namespace dyncomm

#endif  // DYNCOMM_ENV_ROUTING_ENV_HPP_
