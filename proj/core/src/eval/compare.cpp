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
#include "dyncomm/eval/compare.hpp"

#include <cmath>
#include <limits>

namespace dyncomm {

MetricDelta relative_change(double base, double base_std, double other, double other_std) {
  MetricDelta d;
  if (base == 0.0) {
    d.pct = other == 0.0 ? 0.0 : std::numeric_limits<double>::quiet_NaN();
    d.std_pct = std::numeric_limits<double>::quiet_NaN();
    return d;
  }
  d.pct = 100.0 * (other - base) / std::abs(base);
  const double ratio = other / base;
  d.std_pct = 100.0 * std::sqrt(std::pow(other_std / base, 2) + std::pow(ratio * base_std / base, 2));
  return d;
}

namespace {

nlohmann::ordered_json number(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

nlohmann::ordered_json compare_runs(std::span<const RunSummary> runs) {
  nlohmann::ordered_json out;
  out["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : runs) out["runs"].push_back(r.name);
  out["pairs"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    for (std::size_t j = i + 1; j < runs.size(); ++j) {
      nlohmann::ordered_json pair;
      pair["base"] = runs[i].name;
      pair["other"] = runs[j].name;
      for (auto name : kMetricNames) {
        const MetricDelta d =
            relative_change(metric_value(runs[i].mean, name), metric_value(runs[i].std, name),
                            metric_value(runs[j].mean, name), metric_value(runs[j].std, name));
        pair["metrics"][std::string(name)] = {{"pct", number(d.pct)}, {"std_pct", number(d.std_pct)}};
      }
      out["pairs"].push_back(std::move(pair));
    }
  }
  return out;
}

nlohmann::ordered_json summary_to_json(const RunSummary& r) {
  nlohmann::ordered_json j;
  j["name"] = r.name;
  for (auto name : kMetricNames) {
    j["mean"][std::string(name)] = metric_value(r.mean, name);
    j["std"][std::string(name)] = metric_value(r.std, name);
  }
  return j;
}

RunSummary summary_from_json(const nlohmann::json& j) {
  RunSummary r;
  r.name = j.value("name", "");
  for (auto name : kMetricNames) {
    const std::string key(name);
    set_metric(r.mean, name, j.at("mean").at(key).get<double>());
    set_metric(r.std, name, j.at("std").at(key).get<double>());
  }
  return r;
}

}  // namespace dyncomm
