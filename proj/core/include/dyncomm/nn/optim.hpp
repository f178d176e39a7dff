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
#ifndef DYNCOMM_NN_OPTIM_HPP_
#define DYNCOMM_NN_OPTIM_HPP_

#include "dyncomm/nn/tensor.hpp"

namespace dyncomm::nn {

struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

// Global L2 norm of all gradients in the set.
double grad_norm(const ParamSet& params);

// Rescales every gradient by max_norm / g when g > max_norm. Returns g, the
// norm before clipping.
double clip_grad_norm(ParamSet& params, double max_norm);

// One AdamW step with decoupled weight decay:
//   p <- p - lr * wd * p - lr * m_hat / (sqrt(v_hat) + eps)
void adamw_step(ParamSet& params, const AdamWConfig& cfg);
void adamw_step(ParamSet& params, double lr, double wd);

}  // namespace dyncomm::nn

#endif  // DYNCOMM_NN_OPTIM_HPP_
