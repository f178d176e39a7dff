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
#ifndef DYNCOMM_MODEL_NODE_MODEL_HPP_
#define DYNCOMM_MODEL_NODE_MODEL_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyncomm/graph/graph.hpp"
#include "dyncomm/model/aggregation.hpp"
#include "dyncomm/model/controller.hpp"
#include "dyncomm/nn/layers.hpp"
#include "dyncomm/nn/tensor.hpp"

namespace dyncomm {

// Who transmits in each communication round.
enum class CommMode {
  kMaximum,     // every active pair, every round
  kController,  // round 0 full, later rounds gated by the controller
  kMatched,     // Bernoulli(p_k) per (receiver, slot, round)
};

const char* to_string(CommMode m);
CommMode parse_comm_mode(const std::string& s);  // "max", "controller", "matched"

struct NodeModelConfig {
  int obs_width = 88;
  int hidden = 64;
  std::vector<int> encoder = {256, 128};
  int rounds = 4;
  AggregationKind agg = AggregationKind::kGat;
  CommMode comm = CommMode::kMaximum;
  ControllerConfig controller;
  std::vector<double> matched_p;  // per round; a single value applies to all
  bool gat_exclude_self = false;
  double mlp_slope = 0.01;
  double gat_slope = 0.2;
};

// Row-stacked topology for a batch of graphs sharing L and D. Row
// b * L + v is node v of graph b.
class BatchTopology {
 public:
  BatchTopology(int L, int D) : L_(L), D_(D) {}
  void add_graph(const Geo2DGraph& g, const std::vector<char>& inactive);
  // Marks nodes inactive for the current step; same layout as add_graph.
  void set_inactive(int graph, const std::vector<char>& inactive);

  int L() const { return L_; }
  int D() const { return D_; }
  int graphs() const { return graphs_; }
  int rows() const { return graphs_ * L_; }
  int nbr(int r, int s) const { return nbr_[r * D_ + s]; }
  int rev(int r, int s) const { return rev_[r * D_ + s]; }
  bool active(int r) const { return active_[r] != 0; }

 private:
  int L_;
  int D_;
  int graphs_ = 0;
  std::vector<int> nbr_;
  std::vector<int> rev_;
  std::vector<char> active_;
};

// Transmissions per (sender row, round).
struct MessageLog {
  int rounds = 0;
  std::vector<int> sent;  // rows x rounds
  int total() const;
  int round_total(int k) const;
  int node_total(int r) const;
  double per_node(int rows) const { return rows ? static_cast<double>(total()) / rows : 0.0; }
};

struct NodeStepOutput {
  nn::Var carry;  // rows x H, the recurrent state after the last round
  nn::Var psi;    // rows x H (D + 1)
  MessageLog log;
  nn::Var alpha;                     // last GAT round, rows x (1 + D)
  std::vector<nn::Matrix> gate_probs;  // per controller round, rows x (1 + D)
  std::vector<nn::Matrix> transmit;    // per round, rows x D (receiver view)
};

// Encoder MLP, RNN-A and RNN-B GRU cells, aggregation weights, controller.
// RNN-A and RNN-B share one carried vector: the GRU hidden state.
class NodeModel {
 public:
  explicit NodeModel(NodeModelConfig cfg);

  const NodeModelConfig& config() const { return cfg_; }
  int psi_width(int D) const { return cfg_.hidden * (D + 1); }

  void init(nn::ParamSet& params, Rng& rng) const;
  nn::Var encode(const nn::Var& obs, nn::ParamSet& params) const;

  // One environment step of the node state update U(h, m, s). seeds[b]
  // drives controller noise and matched-communication draws for graph b,
  // so a replayed step reproduces the original gates exactly regardless of
  // how graphs are batched.
  NodeStepOutput step(const nn::Var& m, const nn::Var& carry, const BatchTopology& topo,
                      nn::ParamSet& params, Mode mode,
                      std::span<const std::uint64_t> seeds) const;

 private:
  NodeModelConfig cfg_;
  nn::Mlp encoder_;
  nn::GruCell gru_a_;
  nn::GruCell gru_b_;
};

// Convenience: node_state_update for a single graph given raw observations.
NodeStepOutput node_state_update(const NodeModel& model, nn::ParamSet& params,
                                 const nn::Var& obs, const nn::Var& carry,
                                 const Geo2DGraph& g, const std::vector<char>& inactive,
                                 Mode mode, std::uint64_t seed);

}  // namespace dyncomm

#endif  // DYNCOMM_MODEL_NODE_MODEL_HPP_
