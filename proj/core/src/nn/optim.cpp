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
#include "dyncomm/nn/optim.hpp"

#include <cmath>

namespace dyncomm::nn {

double grad_norm(const ParamSet& params) {
  double sq = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) sq += params[i].grad.squaredNorm();
  return std::sqrt(sq);
}

double clip_grad_norm(ParamSet& params, double max_norm) {
  const double g = grad_norm(params);
  if (g > max_norm && g > 0.0) {
    const double s = max_norm / g;
    for (std::size_t i = 0; i < params.size(); ++i) params[i].grad *= s;
  }
  return g;
}

void adamw_step(ParamSet& params, const AdamWConfig& cfg) {
  params.step_count += 1;
  const double t = static_cast<double>(params.step_count);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    p.m = cfg.beta1 * p.m + (1.0 - cfg.beta1) * p.grad;
    p.v = cfg.beta2 * p.v + (1.0 - cfg.beta2) * p.grad.cwiseProduct(p.grad);
    p.value *= (1.0 - cfg.lr * cfg.weight_decay);
    p.value.array() -=
        cfg.lr * (p.m.array() / bc1) / ((p.v.array() / bc2).sqrt() + cfg.eps);
  }
}

void adamw_step(ParamSet& params, double lr, double wd) {
  AdamWConfig cfg;
  cfg.lr = lr;
  cfg.weight_decay = wd;
  adamw_step(params, cfg);
}

}  // namespace dyncomm::nn
