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
#ifndef DYNCOMM_AGENT_DQN_HPP_
#define DYNCOMM_AGENT_DQN_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "dyncomm/nn/layers.hpp"
#include "dyncomm/nn/tensor.hpp"
#include "dyncomm/rng.hpp"

namespace dyncomm {

struct QNetConfig {
  int agent_obs_width = 149;
  int psi_width = 256;
  std::vector<int> encoder = {256, 128};
  int n_actions = 4;  // D + 1
  double slope = 0.01;
};

// Behaviour and target Q networks: MLP over [agent_obs | psi] through the
// encoder widths, then a linear head to D + 1 action values.
class QNets {
 public:
  explicit QNets(QNetConfig cfg);

  void init(Rng& rng);
  const QNetConfig& config() const { return cfg_; }

  nn::ParamSet behaviour;
  nn::ParamSet target;

  // which: the parameter set to evaluate (behaviour or target).
  nn::Var forward(const nn::Var& agent_obs, const nn::Var& psi, nn::ParamSet& which) const;
  // Hard copy behaviour -> target.
  void sync_target();

 private:
  QNetConfig cfg_;
  nn::Mlp mlp_;
};

// q_forward on plain matrices (no gradient).
nn::Matrix q_forward(const QNets& nets, const nn::Matrix& agent_obs, const nn::Matrix& psi,
                     bool use_target);

// Uniform random action with probability epsilon, otherwise the first
// maximal index.
int select_action(std::span<const double> q, double epsilon, Rng& rng);
int argmax_first(std::span<const double> q);

// target <- (1 - tau) target + tau behaviour.
void soft_update_target(QNets& nets, double tau);
void soft_update(nn::ParamSet& target, const nn::ParamSet& source, double tau);

struct EpsilonSchedule {
  double initial = 1.0;
  double minimum = 0.01;
  double decay = 0.999;
  std::int64_t decay_every = 100;
  std::int64_t warmup = 100000;

  // 1 during warmup, then max(minimum, initial * decay^floor((step - warmup) / decay_every)).
  double operator()(std::int64_t step) const;
};

}  // namespace dyncomm

#endif  // DYNCOMM_AGENT_DQN_HPP_
