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
#ifndef DYNCOMM_EVAL_EVALUATE_HPP_
#define DYNCOMM_EVAL_EVALUATE_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dyncomm/eval/metrics.hpp"
#include "dyncomm/train/rl_trainer.hpp"

namespace dyncomm {

enum class PolicyKind { kLearned, kRandom, kOracle };
const char* to_string(PolicyKind p);
PolicyKind parse_policy(const std::string& s);

struct EvalConfig {
  EnvConfig env;
  int horizon = 300;
};

// Next-hop slot per (node, destination) following failure-free delay
// shortest paths; lowest slot on ties, -1 on the diagonal.
IntMatrix oracle_next_slot(const Geo2DGraph& g);

struct EpisodeOutput {
  RoutingMetrics metrics;
  // Per round: transmissions / (L * D) averaged over steps (learned only).
  std::vector<double> round_rate;
  std::vector<TraceRecord> trace;  // filled when requested
};

// One episode of cfg.horizon steps. agent may be null unless policy is
// kLearned. Learned policies act greedily with controller noise off.
EpisodeOutput run_episode(const Geo2DGraph& g, PolicyKind policy, RoutingAgent* agent,
                          const EvalConfig& cfg, std::uint64_t seed, bool keep_trace = false);

struct PolicyEvaluation {
  std::vector<std::uint64_t> seeds;
  std::vector<RoutingMetrics> per_seed;  // pooled over all graphs
  RoutingMetrics mean;
  RoutingMetrics std;
  std::vector<double> round_rate;  // mean over every episode
};

PolicyEvaluation evaluate_policy(std::span<const Geo2DGraph> graphs, PolicyKind policy,
                                 RoutingAgent* agent, const EvalConfig& cfg,
                                 std::span<const std::uint64_t> seeds);

}  // namespace dyncomm

#endif  // DYNCOMM_EVAL_EVALUATE_HPP_
