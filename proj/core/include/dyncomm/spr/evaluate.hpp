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
#ifndef DYNCOMM_SPR_EVALUATE_HPP_
#define DYNCOMM_SPR_EVALUATE_HPP_

#include <span>
#include <vector>

#include "dyncomm/train/spr_trainer.hpp"

namespace dyncomm {

struct SprEvalRow {
  int seq_len = 0;
  double mean = 0.0;
  double std = 0.0;  // population std across models
  std::vector<double> per_model;
};

// MSE per sequence length for each model (one per training seed).
std::vector<SprEvalRow> evaluate_spr(std::span<SprModel* const> models,
                                     std::span<const SprSample> samples,
                                     std::span<const int> seq_lens, int batch = 100);

}  // namespace dyncomm

#endif  // DYNCOMM_SPR_EVALUATE_HPP_
