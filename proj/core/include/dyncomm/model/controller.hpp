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
#ifndef DYNCOMM_MODEL_CONTROLLER_HPP_
#define DYNCOMM_MODEL_CONTROLLER_HPP_

#include <string>
#include <vector>

#include "dyncomm/nn/tensor.hpp"
#include "dyncomm/rng.hpp"

namespace dyncomm {

enum class Mode { kTrain, kEval };

struct ControllerConfig {
  int hidden = 64;
  int heads = 4;
  double comm_bias = 0.5;
  double noise_scale = 0.3;
};

// Registers ctrl.w_q, ctrl.w_k, ctrl.w_v (H x H), ctrl.w_fc (H x 1) with
// Xavier init and ctrl.b_fc (1 x 1) at zero.
void init_controller(nn::ParamSet& params, const ControllerConfig& cfg, Rng& rng,
                     const std::string& prefix = "ctrl");

struct ControllerOutput {
  nn::Var probs;   // groups x (1 + D): sigmoid outputs, column 0 is the self row
  nn::Var logits;  // groups x (1 + D): z before noise
};

// x stacks groups of (1 + D) rows: the sender's own state followed by the
// states last received from each neighbor slot. Multi-head scaled
// dot-product attention within each group, then z = A W_fc + b_fc + beta,
// plus N(0, noise^2) when mode is kTrain and noise_rng is given.
ControllerOutput controller_forward(const nn::Var& x, int group, nn::ParamSet& params,
                                    const ControllerConfig& cfg, Mode mode, Rng* noise_rng,
                                    const std::string& prefix = "ctrl");
// Same, with the logit noise supplied (rows x 1) or none.
ControllerOutput controller_forward(const nn::Var& x, int group, nn::ParamSet& params,
                                    const ControllerConfig& cfg, const nn::Matrix* noise,
                                    const std::string& prefix = "ctrl");

// transmit = prob > 0.5 (strict).
std::vector<char> gate_decision(const nn::Matrix& probs);

// Independent Bernoulli(p) draws.
std::vector<char> matched_communication_gate(std::size_t n, double p, Rng& rng);

}  // namespace dyncomm

#endif  // DYNCOMM_MODEL_CONTROLLER_HPP_
