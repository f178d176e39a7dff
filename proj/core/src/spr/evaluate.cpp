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
#include "dyncomm/spr/evaluate.hpp"

#include <cmath>

namespace dyncomm {

std::vector<SprEvalRow> evaluate_spr(std::span<SprModel* const> models,
                                     std::span<const SprSample> samples,
                                     std::span<const int> seq_lens, int batch) {
  std::vector<SprEvalRow> rows;
  for (int len : seq_lens) {
    SprEvalRow r;
    r.seq_len = len;
    for (SprModel* m : models) r.per_model.push_back(spr_mse(*m, samples, len, batch));
    double s = 0.0;
    for (double v : r.per_model) s += v;
    r.mean = r.per_model.empty() ? 0.0 : s / r.per_model.size();
    double var = 0.0;
    for (double v : r.per_model) var += (v - r.mean) * (v - r.mean);
    r.std = r.per_model.empty() ? 0.0 : std::sqrt(var / r.per_model.size());
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace dyncomm
