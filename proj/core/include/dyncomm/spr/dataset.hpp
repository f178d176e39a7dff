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
#ifndef DYNCOMM_SPR_DATASET_HPP_
#define DYNCOMM_SPR_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dyncomm/env/routing_env.hpp"
#include "dyncomm/graph/graph.hpp"
#include "dyncomm/nn/tensor.hpp"

namespace dyncomm {

// A graph, the node observations right after an environment reset, and
// the APSP(delay) matrix as regression labels.
struct SprSample {
  Geo2DGraph graph;
  nn::Matrix obs;     // L x node_obs_width
  nn::Matrix labels;  // L x L
};

struct SprDataConfig {
  int nodes = 20;
  int degree = 3;
  GraphGenConfig graphgen;
  EnvConfig env;
  int train = 5000;
  int val = 500;
  int test = 500;
};

struct SprDataset {
  std::vector<SprSample> train;
  std::vector<SprSample> val;
  std::vector<SprSample> test;
};

SprSample make_spr_sample(const Geo2DGraph& g, const EnvConfig& env, Rng& env_rng);

// Graphs come from one generator stream in the order train, val, test, so
// splits never share a graph.
SprDataset build_dataset(const SprDataConfig& cfg, std::uint64_t seed);

// Writes train/, val/, test/ graph directories with labels.
void save_dataset(const std::filesystem::path& dir, const SprDataset& ds);

}  // namespace dyncomm

#endif  // DYNCOMM_SPR_DATASET_HPP_
