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
#include "dyncomm/env/routing_env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>

namespace dyncomm {

const char* to_string(PacketEvent e) {
  switch (e) {
    case PacketEvent::kWait: return "wait";
    case PacketEvent::kFrozen: return "frozen";
    case PacketEvent::kInTransit: return "in_transit";
    case PacketEvent::kDepart: return "depart";
    case PacketEvent::kInactive: return "inactive";
    case PacketEvent::kBlocked: return "blocked";
    case PacketEvent::kArrive: return "arrive";
    case PacketEvent::kDeliver: return "deliver";
  }
  return "?";
}

void write_trace_jsonl(std::ostream& os, std::span<const TraceRecord> trace) {
  char buf[256];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof(buf),
                  "{\"step\":%d,\"packet\":%d,\"action\":%d,\"event\":\"%s\",\"reward\":%.17g,"
                  "\"node\":%d,\"src\":%d,\"dst\":%d,\"spawn_step\":%d}\n",
                  r.step, r.packet, r.action, to_string(r.event), r.reward, r.node, r.src, r.dst,
                  r.spawn_step);
    os << buf;
  }
}

int node_obs_width(int L, int D) { return L + 2 + D * (L + 2); }
int agent_obs_width(int L, int D, int n_packets) { return n_packets + 1 + 3 * L + 2 + D * (L + 2); }

namespace {

// Sum of sizes in transit on each directed edge, indexed v * D + slot.
std::vector<double> edge_loads(const Geo2DGraph& g, const EnvSnapshot& s) {
  std::vector<double> load(static_cast<std::size_t>(g.L) * g.D, 0.0);
  for (const auto& p : s.packets) {
    if (p.on_edge) load[p.current * g.D + g.slot_of(p.current, p.next)] += p.size;
  }
  return load;
}

void write_neighbor_block(const Geo2DGraph& g, int v, const std::vector<double>& load,
                          double* out) {
  for (int s = 0; s < g.D; ++s) {
    double* blk = out + s * (g.L + 2);
    blk[g.neighbors[v][s]] = 1.0;
    blk[g.L] = g.delays[v][s];
    blk[g.L + 1] = load[v * g.D + s];
  }
}

}  // namespace

nn::Matrix node_observations(const Geo2DGraph& g, const EnvSnapshot& s) {
  const int L = g.L;
  nn::Matrix obs = nn::Matrix::Zero(L, node_obs_width(L, g.D));
  const auto load = edge_loads(g, s);
  for (int v = 0; v < L; ++v) obs(v, v) = 1.0;
  for (const auto& p : s.packets) {
    if (p.on_edge) continue;
    obs(p.current, L) += 1.0;
    obs(p.current, L + 1) += p.size;
  }
  for (int v = 0; v < L; ++v) write_neighbor_block(g, v, load, obs.row(v).data() + L + 2);
  return obs;
}

nn::Matrix agent_observations(const Geo2DGraph& g, const EnvSnapshot& s) {
  const int L = g.L;
  const int P = static_cast<int>(s.packets.size());
  nn::Matrix obs = nn::Matrix::Zero(P, agent_obs_width(L, g.D, P));
  const auto load = edge_loads(g, s);
  for (int i = 0; i < P; ++i) {
    const Packet& p = s.packets[i];
    double* row = obs.row(i).data();
    row[p.id] = 1.0;
    int off = P;
    row[off++] = p.size;
    row[off + p.dst] = 1.0;
    off += L;
    row[off + p.current] = 1.0;
    off += L;
    if (p.previous >= 0) row[off + p.previous] = 1.0;
    off += L;
    row[off++] = p.on_edge ? 1.0 : 0.0;
    row[off++] = p.remaining;
    write_neighbor_block(g, p.current, load, row + off);
  }
  return obs;
}

RoutingEnv::RoutingEnv(EnvConfig cfg) : cfg_(cfg) {
  if (cfg_.n_packets < 1) throw std::invalid_argument("n_packets must be >= 1");
  if (cfg_.failure_min < 1 || cfg_.failure_max < cfg_.failure_min) {
    throw std::invalid_argument("failure duration range invalid");
  }
  if (cfg_.bandwidth < 1) throw std::invalid_argument("bandwidth must be >= 1");
}

int RoutingEnv::max_inactive() const {
  return static_cast<int>(std::floor(cfg_.max_inactive_frac * graph_.L + 1e-9));
}

int RoutingEnv::inactive_count() const {
  return static_cast<int>(std::count(snap_.inactive.begin(), snap_.inactive.end(), 1));
}

void RoutingEnv::spawn(int p, int step, bool distinct_pair) {
  const int L = graph_.L;
  Packet& pk = snap_.packets[p];
  for (;;) {
    pk.src = static_cast<int>(rng_->uniform_int(0, L - 1));
    pk.dst = static_cast<int>(rng_->uniform_int(0, L - 2));
    if (pk.dst >= pk.src) ++pk.dst;
    if (!distinct_pair) break;
    bool clash = false;
    for (int q = 0; q < p; ++q) {
      clash |= snap_.packets[q].src == pk.src && snap_.packets[q].dst == pk.dst;
    }
    if (!clash) break;
  }
  pk.id = p;
  pk.size = rng_->uniform();
  pk.current = pk.src;
  pk.previous = -1;
  pk.next = -1;
  pk.on_edge = false;
  pk.remaining = 0;
  pk.spawn_step = step;
  pk.hops_taken = 0;
  std::fill(visited_[p].begin(), visited_[p].end(), 0);
  visited_[p][pk.src] = 1;
}

void RoutingEnv::reset(const Geo2DGraph& g, Rng& rng) {
  if (g.L < 2 || g.D < 1) throw std::invalid_argument("reset: graph too small");
  graph_ = g;
  rng_ = &rng;
  step_ = 0;
  trace_.clear();
  snap_.packets.assign(cfg_.n_packets, Packet{});
  snap_.inactive.assign(g.L, 0);
  recover_at_.assign(g.L, 0);
  visited_.assign(cfg_.n_packets, std::vector<char>(g.L, 0));
  const bool distinct = cfg_.n_packets <= g.L * (g.L - 1);
  for (int p = 0; p < cfg_.n_packets; ++p) spawn(p, 0, distinct);
}

void RoutingEnv::advance_failures() { advance_failures(nullptr); }

void RoutingEnv::advance_failures(StepEvents* ev) {
  const int L = graph_.L;
  std::vector<char> just(L, 0);
  for (int v = 0; v < L; ++v) {
    if (snap_.inactive[v] && recover_at_[v] <= step_) {
      snap_.inactive[v] = 0;
      just[v] = 1;
      if (ev) ev->recoveries.push_back(v);
    }
  }
  if (cfg_.failure_prob <= 0.0) return;
  std::vector<int> order(L);
  std::iota(order.begin(), order.end(), 0);
  for (int i = L - 1; i > 0; --i) std::swap(order[i], order[rng_->uniform_int(0, i)]);
  const int cap = max_inactive();
  int count = inactive_count();
  for (int v : order) {
    if (snap_.inactive[v] || just[v]) continue;
    const bool below_cap = count < cap;
    const bool fail = rng_->bernoulli(cfg_.failure_prob);
    if (ev && below_cap) ++ev->failure_draws;
    if (!fail || !below_cap) continue;
    const int dur = static_cast<int>(rng_->uniform_int(cfg_.failure_min, cfg_.failure_max));
    snap_.inactive[v] = 1;
    recover_at_[v] = step_ + dur;
    ++count;
    if (ev) ev->failures.push_back({v, step_, dur});
  }
}

StepResult RoutingEnv::step(std::span<const int> actions) {
  if (!rng_) throw std::logic_error("step before reset");
  const int P = cfg_.n_packets;
  const int D = graph_.D;
  if (static_cast<int>(actions.size()) != P) {
    throw std::invalid_argument("step: expected " + std::to_string(P) + " actions, got " +
                                std::to_string(actions.size()));
  }
  for (int p = 0; p < P; ++p) {
    if (actions[p] < 0 || actions[p] > D) {
      throw std::out_of_range("step: action " + std::to_string(actions[p]) + " for packet " +
                              std::to_string(p) + " outside [0, " + std::to_string(D) + "]");
    }
  }
  const int t = step_;
  StepResult res;
  res.rewards.assign(P, 0.0);
  res.done.assign(P, 0);
  StepEvents& ev = res.events;
  ev.event.assign(P, PacketEvent::kWait);
  ev.looped.assign(P, 0);

  auto& pk = snap_.packets;
  std::vector<int> occ(static_cast<std::size_t>(graph_.L) * D, 0);
  for (const auto& p : pk) {
    if (p.on_edge) ++occ[p.current * D + graph_.slot_of(p.current, p.next)];
  }

  // Departures, in packet-id order so contention goes to the lowest id.
  for (int i = 0; i < P; ++i) {
    Packet& p = pk[i];
    if (p.on_edge) {
      ev.event[i] = PacketEvent::kInTransit;
      continue;
    }
    if (snap_.inactive[p.current]) {
      ev.event[i] = PacketEvent::kFrozen;
      continue;
    }
    const int a = actions[i];
    if (a == 0) continue;
    const int slot = a - 1;
    const int u = graph_.neighbors[p.current][slot];
    if (snap_.inactive[u]) {
      res.rewards[i] += cfg_.reward_inactive;
      ev.event[i] = PacketEvent::kInactive;
      ++ev.n_inactive;
      continue;
    }
    const int e = p.current * D + slot;
    if (occ[e] >= cfg_.bandwidth) {
      res.rewards[i] += cfg_.reward_blocked;
      ev.event[i] = PacketEvent::kBlocked;
      ++ev.n_blocked;
      continue;
    }
    ++occ[e];
    p.on_edge = true;
    p.next = u;
    p.remaining = graph_.delays[p.current][slot];
    ev.event[i] = PacketEvent::kDepart;
  }
  ev.max_edge_occupancy = occ.empty() ? 0 : *std::max_element(occ.begin(), occ.end());

  // Transit and arrivals.
  for (int i = 0; i < P; ++i) {
    Packet& p = pk[i];
    if (!p.on_edge) continue;
    if (--p.remaining > 0) continue;
    p.previous = p.current;
    p.current = p.next;
    p.next = -1;
    p.on_edge = false;
    ++p.hops_taken;
    if (visited_[i][p.current]) {
      ev.looped[i] = 1;
      ++ev.n_looped;
    } else {
      visited_[i][p.current] = 1;
    }
    if (p.current == p.dst) {
      res.rewards[i] += cfg_.reward_deliver;
      res.done[i] = 1;
      ev.event[i] = PacketEvent::kDeliver;
      ev.deliveries.push_back({i, p.src, p.dst, p.spawn_step, t, p.hops_taken});
    } else {
      ev.event[i] = PacketEvent::kArrive;
    }
  }

  if (trace_on_) {
    for (int i = 0; i < P; ++i) {
      const Packet& p = pk[i];
      trace_.push_back({t, i, actions[i], ev.event[i], res.rewards[i], p.current, p.src, p.dst,
                        p.spawn_step});
    }
  }

  for (int i = 0; i < P; ++i) {
    if (res.done[i]) spawn(i, t + 1, false);
  }
  step_ = t + 1;
  advance_failures(&ev);
  return res;
}

}  // namespace dyncomm
