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
#ifndef DYNCOMM_TRAIN_RL_TRAINER_HPP_
#define DYNCOMM_TRAIN_RL_TRAINER_HPP_

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dyncomm/agent/dqn.hpp"
#include "dyncomm/env/routing_env.hpp"
#include "dyncomm/graph/graph.hpp"
#include "dyncomm/model/node_model.hpp"
#include "dyncomm/nn/optim.hpp"
#include "dyncomm/train/replay.hpp"

namespace dyncomm {

// Node model + Q networks acting in the routing environment.
struct RoutingAgent {
  NodeModel model;
  nn::ParamSet theta_u;
  QNets nets;

  RoutingAgent(const NodeModelConfig& node_cfg, const QNetConfig& q_cfg);
  void init(Rng& rng);
  void save(const std::filesystem::path& path, const std::string& meta) const;
  std::string load(const std::filesystem::path& path);
};

struct ActResult {
  std::vector<int> actions;  // 0 for packets that cannot act
  std::vector<char> acting;  // at a node that is active
  nn::Matrix carry;          // h_{t+1}
  double q_mean = 0.0;       // mean max-Q over acting packets
  int n_acting = 0;
  MessageLog log;
};

// A packet can choose an action when it sits at an active node.
bool is_decision_state(const Packet& p, const std::vector<char>& inactive);

// One node-state update plus epsilon-greedy action selection.
ActResult act(RoutingAgent& agent, const Geo2DGraph& g, const EnvSnapshot& snap,
              const nn::Matrix& carry, Mode mode, std::uint64_t seed, double epsilon,
              Rng& explore);

struct RlConfig {
  int nodes = 20;
  int degree = 3;
  GraphGenConfig graphgen;
  EnvConfig env;
  NodeModelConfig node;
  std::vector<int> q_encoder = {256, 128};
  int episode_steps = 50;
  int seq_len = 8;
  int batch = 32;
  double gamma = 0.9;
  double tau = 0.01;
  nn::AdamWConfig adamw;
  double clip = 1.0;  // <= 0 disables
  std::int64_t total_steps = 1000000;
  std::int64_t train_every = 10;
  std::size_t replay_capacity = 100000;
  EpsilonSchedule epsilon;
  std::int64_t log_every = 100;
  std::int64_t checkpoint_every = 0;  // 0: only at the end
};

struct RlLogRow {
  std::int64_t step;
  double loss;
  double epsilon;
  double reward_ma500;
  double q_ma500;
  double messages_ma500;
};

struct EpisodeStats {
  double reward = 0.0;
  int deliveries = 0;
  int steps = 0;
  double messages_per_node = 0.0;
};

// Q-network shapes implied by the environment and node model.
QNetConfig q_config(const RlConfig& c);

class RlTrainer {
 public:
  RlTrainer(RlConfig cfg, std::uint64_t seed);

  // Runs one episode on a fresh graph, storing its windows in memory and
  // training every train_every steps once past warmup.
  EpisodeStats collect_episode();
  // One TD update on a sampled batch; returns the loss or nullopt when
  // memory holds fewer than one window.
  std::optional<double> train_batch();

  // Runs until total_steps; on_log receives a row every log_every steps.
  void run(const std::function<void(const RlLogRow&)>& on_log = {},
           const std::function<void(std::int64_t)>& on_checkpoint = {});

  RoutingAgent& agent() { return agent_; }
  ReplayMemory& memory() { return memory_; }
  const RlConfig& config() const { return cfg_; }
  std::int64_t step() const { return step_; }
  // Per-step total reward across packets, one entry per environment step.
  const std::vector<double>& step_rewards() const { return step_rewards_; }
  const std::vector<double>& step_q() const { return step_q_; }
  double last_pre_clip_norm_u() const { return last_norm_u_; }
  double last_pre_clip_norm_q() const { return last_norm_q_; }
  // When false, collect_episode never trains (used for replay checks).
  void set_training(bool on) { training_ = on; }

 private:
  RlConfig cfg_;
  RoutingAgent agent_;
  ReplayMemory memory_;
  Rng graph_rng_;
  Rng env_rng_;
  Rng explore_rng_;
  Rng seed_rng_;
  Rng sample_rng_;
  RoutingEnv env_;
  std::int64_t step_ = 0;
  bool training_ = true;
  bool running_ = false;
  double last_loss_ = 0.0;
  double last_norm_u_ = 0.0;
  double last_norm_q_ = 0.0;
  std::vector<double> step_rewards_;
  std::vector<double> step_q_;
  std::vector<double> step_msgs_;
  std::function<void(const RlLogRow&)> on_log_;
  std::function<void(std::int64_t)> on_checkpoint_;
};

struct TdBatchLoss {
  nn::Var loss;
  nn::Matrix q_taken;  // per sample, for inspection
  nn::Matrix targets;
};

// Builds the TD loss for a set of windows on `tape` (node-state replay from
// the stored carry through seq_len + 1 steps; targets from the target
// network on the detached next-step psi).
TdBatchLoss td_loss(RoutingAgent& agent, const std::vector<ReplayMemory::Window>& windows,
                    int seq_len, double gamma, nn::Tape& tape);

// Replays a window with frozen parameters; returns the carries after each
// of its seq_len steps.
std::vector<nn::Matrix> replay_carries(RoutingAgent& agent, const ReplayMemory::Window& w,
                                       int seq_len);

}  // namespace dyncomm

#endif  // DYNCOMM_TRAIN_RL_TRAINER_HPP_
