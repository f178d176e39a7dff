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
#include "dyncomm/agent/dqn.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace dyncomm {

using nn::Matrix;
using nn::Var;

namespace {

std::vector<int> q_dims(const QNetConfig& c) {
  std::vector<int> d = {c.agent_obs_width + c.psi_width};
  d.insert(d.end(), c.encoder.begin(), c.encoder.end());
  d.push_back(c.n_actions);
  return d;
}

}  // namespace

QNets::QNets(QNetConfig cfg)
    : cfg_(std::move(cfg)), mlp_("q", q_dims(cfg_), nn::Activation::kLeakyRelu, cfg_.slope) {}

void QNets::init(Rng& rng) {
  behaviour = nn::ParamSet();
  mlp_.init(behaviour, rng);
  sync_target();
}

void QNets::sync_target() {
  target = behaviour;
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i].m.setZero();
    target[i].v.setZero();
  }
}

Var QNets::forward(const Var& agent_obs, const Var& psi, nn::ParamSet& which) const {
  if (agent_obs.rows() != psi.rows()) throw nn::DimensionError("q_forward: row mismatch");
  if (agent_obs.cols() != cfg_.agent_obs_width || psi.cols() != cfg_.psi_width) {
    throw nn::DimensionError("q_forward: expected widths " + std::to_string(cfg_.agent_obs_width) +
                             " + " + std::to_string(cfg_.psi_width));
  }
  std::array<Var, 2> parts = {agent_obs, psi};
  return mlp_.forward(nn::concat_cols(parts), which);
}

Matrix q_forward(const QNets& nets, const Matrix& agent_obs, const Matrix& psi, bool use_target) {
  nn::Tape t(false);
  auto& set = const_cast<nn::ParamSet&>(use_target ? nets.target : nets.behaviour);
  return nets.forward(t.constant(agent_obs), t.constant(psi), set).value();
}

int argmax_first(std::span<const double> q) {
  if (q.empty()) throw std::invalid_argument("argmax of empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(q.size()); ++i) {
    if (q[i] > q[best]) best = i;
  }
  return best;
}

int select_action(std::span<const double> q, double epsilon, Rng& rng) {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<int>(rng.uniform_int(0, static_cast<std::int64_t>(q.size()) - 1));
  }
  return argmax_first(q);
}

void soft_update(nn::ParamSet& target, const nn::ParamSet& source, double tau) {
  if (target.size() != source.size()) throw nn::DimensionError("soft_update: set sizes differ");
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i].value.rows() != source[i].value.rows() ||
        target[i].value.cols() != source[i].value.cols()) {
      throw nn::DimensionError("soft_update: shape mismatch for " + target[i].name);
    }
    target[i].value = (1.0 - tau) * target[i].value + tau * source[i].value;
  }
}

void soft_update_target(QNets& nets, double tau) { soft_update(nets.target, nets.behaviour, tau); }

double EpsilonSchedule::operator()(std::int64_t step) const {
  if (step < warmup) return initial;
  const auto n = (step - warmup) / std::max<std::int64_t>(1, decay_every);
  return std::max(minimum, initial * std::pow(decay, static_cast<double>(n)));
}

}  // namespace dyncomm
