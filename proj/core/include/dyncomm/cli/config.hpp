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
#ifndef DYNCOMM_CLI_CONFIG_HPP_
#define DYNCOMM_CLI_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dyncomm/eval/evaluate.hpp"
#include "dyncomm/train/rl_trainer.hpp"
#include "dyncomm/train/spr_trainer.hpp"

namespace dyncomm {

// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SprSection {
  int train = 5000;
  int val = 500;
  int test = 500;
  int rounds = 4;
  int iterations = 10000;
  int validate_every = 1000;
  int batch = 32;
  int seq_len = 8;
  int val_batch = 100;
  double lr = 0.001;
  double weight_decay = 0.01;
  double clip = 1.0;
  bool stop_on_spike = false;
  double spike_factor = 5.0;
  std::vector<int> seq_lens = {1, 2, 4, 8, 16, 32, 64, 128, 256};
};

struct EvalSection {
  int graphs = 1000;
  int horizon = 300;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::string policy = "learned";
};

struct ExperimentConfig {
  std::uint64_t seed = 1;
  int nodes = 20;
  int degree = 3;
  GraphGenConfig graphgen;
  EnvConfig env;
  NodeModelConfig node;  // obs_width is derived, not configurable
  RlConfig rl;           // nodes/degree/graphgen/env/node are copied in
  SprSection spr;
  EvalSection eval;
};

nlohmann::ordered_json config_to_json(const ExperimentConfig& c);

// Overlays j on the defaults. Unknown keys, wrong types and out-of-range
// values raise ConfigError naming the field path.
ExperimentConfig config_from_json(const nlohmann::json& j);
void validate(const ExperimentConfig& c);

// Accepts // and /* */ comments.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

// FNV-1a of the canonical dump, 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

// Fills the derived RlConfig fields and observation widths.
RlConfig make_rl_config(const ExperimentConfig& c);
SprDataConfig make_spr_data_config(const ExperimentConfig& c);
SprTrainConfig make_spr_train_config(const ExperimentConfig& c);
NodeModelConfig make_spr_node_config(const ExperimentConfig& c);
EvalConfig make_eval_config(const ExperimentConfig& c);

}  // namespace dyncomm

#endif  // DYNCOMM_CLI_CONFIG_HPP_
