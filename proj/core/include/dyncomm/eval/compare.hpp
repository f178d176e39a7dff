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
#ifndef DYNCOMM_EVAL_COMPARE_HPP_
#define DYNCOMM_EVAL_COMPARE_HPP_

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyncomm/eval/metrics.hpp"

namespace dyncomm {

struct RunSummary {
  std::string name;
  RoutingMetrics mean;
  RoutingMetrics std;
};

struct MetricDelta {
  double pct = 0.0;  // 100 (other - base) / |base|, NaN when base is 0
  double std_pct = 0.0;
};

// First-order propagation for other / base - 1 with independent errors.
MetricDelta relative_change(double base, double base_std, double other, double other_std);

// Every ordered pair (i < j), deltas of run j relative to run i:
// {"runs": [...], "pairs": [{"base", "other", "metrics": {name: {pct, std_pct}}}]}
nlohmann::ordered_json compare_runs(std::span<const RunSummary> runs);

nlohmann::ordered_json summary_to_json(const RunSummary& r);
RunSummary summary_from_json(const nlohmann::json& j);

}  // namespace dyncomm

#endif  // DYNCOMM_EVAL_COMPARE_HPP_
