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
#include "dyncomm/model/controller.hpp"

#include <stdexcept>

#include "dyncomm/nn/layers.hpp"

namespace dyncomm {

using nn::Matrix;
using nn::Var;

void init_controller(nn::ParamSet& params, const ControllerConfig& cfg, Rng& rng,
                     const std::string& prefix) {
  if (cfg.heads < 1 || cfg.hidden % cfg.heads != 0) {
    throw std::invalid_argument("controller: hidden " + std::to_string(cfg.hidden) +
                                " not divisible by heads " + std::to_string(cfg.heads));
  }
  for (const char* w : {".w_q", ".w_k", ".w_v"}) {
    params.add(prefix + w, nn::xavier_uniform(cfg.hidden, cfg.hidden, rng));
  }
  params.add(prefix + ".w_fc", nn::xavier_uniform(cfg.hidden, 1, rng));
  params.add(prefix + ".b_fc", Matrix::Zero(1, 1));
}

ControllerOutput controller_forward(const Var& x, int group, nn::ParamSet& params,
                                    const ControllerConfig& cfg, Mode mode, Rng* noise_rng,
                                    const std::string& prefix) {
  if (mode == Mode::kTrain && noise_rng != nullptr && cfg.noise_scale > 0.0) {
    Matrix noise(x.rows(), 1);
    for (Eigen::Index i = 0; i < noise.rows(); ++i) noise(i, 0) = cfg.noise_scale * noise_rng->normal();
    return controller_forward(x, group, params, cfg, &noise, prefix);
  }
  return controller_forward(x, group, params, cfg, static_cast<const Matrix*>(nullptr), prefix);
}

ControllerOutput controller_forward(const Var& x, int group, nn::ParamSet& params,
                                    const ControllerConfig& cfg, const Matrix* noise,
                                    const std::string& prefix) {
  if (cfg.heads < 1 || cfg.hidden % cfg.heads != 0) {
    throw std::invalid_argument("controller: hidden not divisible by heads");
  }
  if (x.cols() != cfg.hidden) {
    throw nn::DimensionError("controller expects width " + std::to_string(cfg.hidden) + ", got " +
                             std::to_string(x.cols()));
  }
  if (group < 1 || x.rows() % group != 0) throw nn::DimensionError("controller group size");
  nn::Tape& t = *x.tape();
  Var q = nn::matmul(x, t.param(params.get(prefix + ".w_q")));
  Var k = nn::matmul(x, t.param(params.get(prefix + ".w_k")));
  Var v = nn::matmul(x, t.param(params.get(prefix + ".w_v")));
  Var a = nn::grouped_attention(q, k, v, group, cfg.heads);
  Var z = nn::add_row(nn::matmul(a, t.param(params.get(prefix + ".w_fc"))),
                      t.param(params.get(prefix + ".b_fc")));
  z = nn::add_scalar(z, cfg.comm_bias);
  Var zt = z;
  if (noise != nullptr) {
    if (noise->rows() != z.rows() || noise->cols() != 1) throw nn::DimensionError("controller noise shape");
    zt = nn::add(z, t.constant(*noise));
  }
  const Eigen::Index groups = x.rows() / group;
  return {nn::reshape(nn::sigmoid(zt), groups, group), nn::reshape(z, groups, group)};
}

std::vector<char> gate_decision(const Matrix& probs) {
  std::vector<char> out(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) out[i] = probs.data()[i] > 0.5 ? 1 : 0;
  return out;
}

std::vector<char> matched_communication_gate(std::size_t n, double p, Rng& rng) {
  std::vector<char> out(n);
  for (auto& o : out) o = rng.bernoulli(p) ? 1 : 0;
  return out;
}

}  // namespace dyncomm
